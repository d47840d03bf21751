//! Built-in scenarios.

use crate::config::{Caps, ExtraCheck, LevelInput, OmegaInput, ScenarioConfig};

fn scenario(name: &str, divisors: &[u64], omega_seed: u64, n: LevelInput, seed: u64, checks: Vec<ExtraCheck>) -> ScenarioConfig {
    ScenarioConfig {
        name: Some(name.into()),
        g: divisors.len(),
        divisors: divisors.to_vec(),
        omega: OmegaInput::random(omega_seed),
        n,
        eps: torelli_core::abelian::DEFAULT_EPS,
        seed,
        simple_asserted: true,
        caps: Caps::default(),
        extra_checks: checks,
    }
}

/// Named, seeded scenarios covering elliptic projective normality, the
/// dimension obstruction, the surface instance of the section-count bound,
/// the addition-formula coefficients and the supporting property checks.
pub fn catalog() -> Vec<ScenarioConfig> {
    use ExtraCheck::*;
    use LevelInput::*;
    let qp = || QuasiPeriodicity { levels: vec![1, 2, 3], lattice_vectors: 20, points: 5 };
    let tilde = || ThetaTilde { levels: vec![2, 3], points: 5 };
    vec![
        scenario("elliptic-d3", &[3], 11, Fixed(1), 1, vec![Monotonicity]),
        scenario("elliptic-d4", &[4], 12, Fixed(1), 2, vec![Monotonicity]),
        scenario("surface-principal-dimcount", &[1, 1], 21, GMinusOne, 3, vec![Spanning { torsion: 7 }]),
        scenario("surface-33", &[3, 3], 31, GMinusOne, 4, vec![]),
        scenario("surface-33-b", &[3, 3], 32, GMinusOne, 5, vec![]),
        scenario("surface-33-c", &[3, 3], 33, GMinusOne, 6, vec![]),
        scenario("wirtinger-g1-n1", &[1], 41, Fixed(1), 7, vec![Wirtinger { b_samples: 10 }, qp(), tilde()]),
        scenario("wirtinger-g1-n2", &[1], 42, Fixed(2), 8, vec![Wirtinger { b_samples: 10 }, Spanning { torsion: 10 }]),
        scenario("wirtinger-g2-n1", &[1, 1], 43, Fixed(1), 9, vec![Wirtinger { b_samples: 10 }, qp(), tilde()]),
    ]
}

pub fn find(name: &str) -> Option<ScenarioConfig> {
    catalog().into_iter().find(|c| c.name.as_deref() == Some(name))
}
