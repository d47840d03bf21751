//! Random sample points and least-squares expansion in a theta basis.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, LeastSquares};
use crate::par::{try_map_indexed, Exec};
use crate::theta::Theta;

/// Samples per basis element.
pub const OVERSAMPLING: usize = 2;
/// Largest accepted condition number of a sampled basis matrix.
pub const CONDITION_CAP: f64 = 1e10;
/// Attempts (with fresh seeds) before giving up on conditioning.
pub const MAX_ATTEMPTS: usize = 3;
/// Largest accepted relative interpolation residual.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Points `z_p = Ωa_p + Δb_p` with `a_p, b_p` uniform in `[0,1)^g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub seed: u64,
    pub points: Vec<Vec<Complex64>>,
}

impl SampleSet {
    pub fn new(theta: &Theta, count: usize, seed: u64) -> Self {
        let g = theta.g();
        let divisors = theta.delta().divisors();
        let omega = &theta.period().omega;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count)
            .map(|_| {
                let a: Vec<f64> = (0..g).map(|_| rng.random::<f64>()).collect();
                let b: Vec<f64> = (0..g).map(|i| rng.random::<f64>() * divisors[i] as f64).collect();
                (0..g)
                    .map(|i| {
                        let mut z = Complex64::new(b[i], 0.0);
                        for j in 0..g {
                            z += omega[(i, j)] * a[j];
                        }
                        z
                    })
                    .collect()
            })
            .collect();
        SampleSet { seed, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Seed used for the `attempt`-th try.
pub fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs `f` with successive seeds while it reports `IllConditioned`.
pub(crate) fn with_reseed<T>(seed: u64, mut f: impl FnMut(u64) -> Result<T>) -> Result<T> {
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        match f(attempt_seed(seed, attempt)) {
            Err(Error::IllConditioned { condition, cap, .. }) => {
                last = Some(Error::IllConditioned { condition, cap, attempts: attempt + 1 });
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

/// A sampled level-`m` basis, factored once for repeated least-squares fits.
pub struct BasisFit {
    pub level: u64,
    pub samples: SampleSet,
    pub values: CMatrix,
    solver: LeastSquares,
}

impl BasisFit {
    /// Fails with `IllConditioned` when the sample matrix is too badly conditioned.
    pub fn on_samples(theta: &Theta, m: u64, samples: SampleSet, exec: Exec) -> Result<Self> {
        let dim = theta.indices(m)?.len();
        if samples.len() < OVERSAMPLING * dim {
            return Err(Error::InvalidArgument(format!(
                "{} samples are fewer than {OVERSAMPLING}·h0 = {}",
                samples.len(),
                OVERSAMPLING * dim
            )));
        }
        let values = theta.basis_matrix(m, &samples.points, exec)?;
        let solver = LeastSquares::new(values.clone());
        if !(solver.condition() <= CONDITION_CAP) {
            return Err(Error::IllConditioned { condition: solver.condition(), cap: CONDITION_CAP, attempts: 1 });
        }
        Ok(BasisFit { level: m, samples, values, solver })
    }

    /// Draws `OVERSAMPLING·h0(m)` points, reseeding on bad conditioning.
    pub fn new(theta: &Theta, m: u64, seed: u64, exec: Exec) -> Result<Self> {
        let count = OVERSAMPLING * theta.indices(m)?.len();
        with_reseed(seed, |s| Self::on_samples(theta, m, SampleSet::new(theta, count, s), exec))
    }

    pub fn condition(&self) -> f64 {
        self.solver.condition()
    }

    /// Fits every column of `rhs` (normalized level-`m` values at the samples).
    pub fn fit(&self, rhs: &CMatrix) -> (CMatrix, Vec<f64>) {
        self.solver.solve(rhs)
    }

    /// Fits one function given by its normalized values at the sample points.
    pub fn expand_values(&self, values: &[Complex64]) -> Result<Expansion> {
        let rhs = CMatrix::from_column_slice(values.len(), 1, values);
        let (x, residuals) = self.fit(&rhs);
        let residual = residuals[0];
        if !(residual <= RESIDUAL_TOL) {
            return Err(Error::NotInSpan { level: self.level, residual });
        }
        Ok(Expansion { coefficients: x.column(0).iter().copied().collect(), residual })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    /// In the order of `Theta::indices(m)`.
    pub coefficients: Vec<Complex64>,
    /// `‖Bx − f‖ / ‖f‖` over the samples.
    pub residual: f64,
}

/// Least-squares coefficients of `f` in the level-`m` basis.
///
/// `f` must return values normalized at level `m`, i.e. multiplied by
/// `exp(−π m yᵗ(Im Ω)⁻¹y)`; products of normalized sections qualify.
pub fn expand_in_basis<F>(theta: &Theta, m: u64, f: F, samples: &SampleSet) -> Result<Expansion>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync + Send,
{
    let fit = BasisFit::on_samples(theta, m, samples.clone(), Exec::default())?;
    let values = try_map_indexed(samples.len(), Exec::default(), |p| f(&samples.points[p]))?;
    fit.expand_values(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{validate_polarized, PeriodMatrix, PolarizationType};

    fn theta(d: &[u64]) -> Theta {
        let c = Complex64::new;
        let rows = [vec![c(0.31, 1.7), c(0.12, 0.4)], vec![c(0.12, 0.4), c(-0.22, 1.3)]];
        Theta::new(
            &validate_polarized(PeriodMatrix::from_rows(&rows), PolarizationType::new(d.to_vec()), true, 1e-12).unwrap(),
        )
    }

    #[test]
    fn samples_are_deterministic() {
        let t = theta(&[1, 2]);
        assert_eq!(SampleSet::new(&t, 10, 4), SampleSet::new(&t, 10, 4));
        assert_ne!(SampleSet::new(&t, 10, 4), SampleSet::new(&t, 10, 5));
    }

    #[test]
    fn basis_elements_expand_to_unit_vectors() {
        let t = theta(&[1, 2]);
        let m = 2;
        let indices = t.indices(m).unwrap();
        let samples = SampleSet::new(&t, 2 * indices.len(), 17);
        for (j, idx) in indices.iter().enumerate() {
            let e = expand_in_basis(&t, m, |z| t.eval_normalized(idx, z), &samples).unwrap();
            assert!(e.residual < 1e-10);
            for (k, v) in e.coefficients.iter().enumerate() {
                let expected = if k == j { 1.0 } else { 0.0 };
                assert!((v - expected).norm() < 1e-9, "coefficient {k} of basis {j}: {v}");
            }
        }
        let e = expand_in_basis(
            &t,
            m,
            |z| Ok(t.eval_normalized(&indices[0], z)? + t.eval_normalized(&indices[1], z)?),
            &samples,
        )
        .unwrap();
        assert!(e.residual < 1e-10);
        assert!((e.coefficients[0] - 1.0).norm() < 1e-9 && (e.coefficients[1] - 1.0).norm() < 1e-9);
        assert!(e.coefficients[2..].iter().all(|v| v.norm() < 1e-9));
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let t = theta(&[1, 1]);
        let samples = SampleSet::new(&t, 3, 1);
        assert!(matches!(
            expand_in_basis(&t, 2, |_| Ok(Complex64::new(1.0, 0.0)), &samples),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn non_sections_are_not_in_span() {
        let t = theta(&[1, 1]);
        let samples = SampleSet::new(&t, 8, 2);
        let r = expand_in_basis(&t, 2, |z| Ok(z[0].exp()), &samples);
        assert!(matches!(r, Err(Error::NotInSpan { .. })), "{r:?}");
    }

    #[test]
    fn reseeding_stops_after_max_attempts() {
        let mut seeds = Vec::new();
        let r: Result<()> = with_reseed(5, |s| {
            seeds.push(s);
            Err(Error::IllConditioned { condition: 1e12, cap: CONDITION_CAP, attempts: 1 })
        });
        assert_eq!(seeds.len(), MAX_ATTEMPTS);
        assert_eq!(seeds[0], 5);
        assert!(matches!(r, Err(Error::IllConditioned { attempts: 3, .. })));
    }
}
