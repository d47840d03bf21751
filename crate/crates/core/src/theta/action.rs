//! Factor of automorphy and the normalized action of `K(Lᵐ)_1` on sections.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Period, SectionIndex, Theta};
use crate::error::{Error, Result};
use crate::torsion::TorsionPoint;

/// `exp(−πi m aᵗΩa − 2πi m aᵗz)` for real `a`: the cocycle when `a ∈ Z^g`,
/// and the factor stripped by the normalized translation when `a ∈ (mΔ)⁻¹Z^g`.
#[derive(Debug, Clone)]
pub struct StripFactor {
    m: u64,
    a: Vec<f64>,
    period: Period,
}

impl StripFactor {
    pub(crate) fn new(theta: &Theta, m: u64, a: Vec<f64>) -> Self {
        StripFactor { m, a, period: theta.period().clone() }
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// The exponent `−πi m (aᵗΩa + 2aᵗz)`.
    pub fn log(&self, z: &[Complex64]) -> Complex64 {
        let g = self.a.len();
        let mut q = Complex64::new(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                q += self.a[i] * self.period.omega[(i, j)] * self.a[j];
            }
            q += 2.0 * self.a[i] * z[i];
        }
        Complex64::new(0.0, -PI * self.m as f64) * q
    }

    pub fn value(&self, z: &[Complex64]) -> Complex64 {
        self.log(z).exp()
    }

    /// `value / |value|`, the part that survives in the normalized frame.
    pub fn phase(&self, z: &[Complex64]) -> Complex64 {
        Complex64::from_polar(1.0, self.log(z).im)
    }
}

/// `e(λ, z)` for the lattice vector `λ = Ωa + b`, `a ∈ Z^g`, `b ∈ ΔZ^g`.
pub fn automorphy_factor(theta: &Theta, m: u64, a: &[i64], b: &[i64], z: &[Complex64]) -> Result<Complex64> {
    let g = theta.g();
    if a.len() != g || b.len() != g || z.len() != g {
        return Err(Error::InvalidArgument("automorphy_factor: dimension mismatch".into()));
    }
    if b.iter().zip(theta.delta().divisors()).any(|(&bi, &d)| bi.rem_euclid(d as i64) != 0) {
        return Err(Error::NotLatticeVector);
    }
    let a = a.iter().map(|&v| v as f64).collect();
    Ok(StripFactor::new(theta, m, a).value(z))
}

/// `|θ_c(z+λ) − e(λ,z)·θ_c(z)|` measured in the normalized frame, relative to
/// `1 + |ϑ_c(z)|`. `λ = Ωa + b` need not be a lattice vector; both sides are
/// direct lattice sums without reduction.
pub fn quasi_periodicity_residual(
    theta: &Theta,
    idx: &SectionIndex,
    a: &[f64],
    b: &[f64],
    z: &[Complex64],
) -> Result<f64> {
    let g = theta.g();
    if a.len() != g || b.len() != g {
        return Err(Error::InvalidArgument("quasi_periodicity_residual: dimension mismatch".into()));
    }
    let shifted = shift(theta, z, a, b);
    let lhs = theta.eval_normalized_direct(idx, &shifted)?;
    let base = theta.eval_normalized_direct(idx, z)?;
    let phase = StripFactor::new(theta, idx.level(), a.to_vec()).phase(z);
    Ok((lhs - phase * base).norm() / (1.0 + base.norm()))
}

/// `z + Ωa + b`.
pub(crate) fn shift(theta: &Theta, z: &[Complex64], a: &[f64], b: &[f64]) -> Vec<Complex64> {
    let omega = &theta.period().omega;
    (0..z.len())
        .map(|i| {
            let mut w = z[i] + b[i];
            for j in 0..z.len() {
                w += omega[(i, j)] * a[j];
            }
            w
        })
        .collect()
}

/// The normalized action of `x = Ωa ∈ K(Lᵐ)_1`: `θ_c(z + Ωa) = F(z)·θ_{c+a}(z)`
/// with `F` the returned strip factor, so the action permutes the basis.
pub fn translate_action(
    theta: &Theta,
    m: u64,
    x: &TorsionPoint,
    idx: &SectionIndex,
) -> Result<(SectionIndex, StripFactor)> {
    if !x.in_k1(m, theta.delta()) {
        return Err(Error::NotInK1 { level: m });
    }
    if idx.level() != m {
        return Err(Error::InvalidArgument(format!(
            "section index has level {} but the action is at level {m}",
            idx.level()
        )));
    }
    let next = idx.shifted(x.a(), theta.delta())?;
    Ok((next, StripFactor::new(theta, m, x.a_f64())))
}

/// Raw `θ̃(z) = Σ_{ℓ∈Z^g} exp(πi ℓᵗ(Ω/n)ℓ + 2πi ℓᵗz)`, a section of `Mⁿ`
/// fixed by the normalized action of `K(Mⁿ)_1`.
pub fn invariant_theta_tilde(theta: &Theta, n: u64, z: &[Complex64]) -> Result<Complex64> {
    let v = theta.theta_tilde_normalized(n, z)?;
    Ok(v / theta.envelope(n, z))
}

impl Theta {
    /// Normalized value of the translate `U_a θ_c = F_a⁻¹ · t_{Ωa}^*θ_c` at `z`.
    pub fn translate_normalized(&self, idx: &SectionIndex, a: &[f64], z: &[Complex64]) -> Result<Complex64> {
        let shifted = shift(self, z, a, &vec![0.0; a.len()]);
        let v = self.eval_normalized(idx, &shifted)?;
        let phase = StripFactor::new(self, idx.level(), a.to_vec()).phase(z);
        Ok(v * phase.conj())
    }

    /// Normalized value of `U_a θ̃` at level `n`.
    pub fn theta_tilde_translate_normalized(&self, n: u64, a: &[f64], z: &[Complex64]) -> Result<Complex64> {
        let shifted = shift(self, z, a, &vec![0.0; a.len()]);
        let v = self.theta_tilde_normalized(n, &shifted)?;
        let phase = StripFactor::new(self, n, a.to_vec()).phase(z);
        Ok(v * phase.conj())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{validate_polarized, PeriodMatrix, PolarizationType, PolarizedAbelianVariety};
    use crate::torsion::k_group;
    use num_rational::Rational64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn elliptic(d: u64) -> PolarizedAbelianVariety {
        validate_polarized(
            PeriodMatrix::from_rows(&[vec![c(0.17, 1.2)]]),
            PolarizationType::new(vec![d]),
            true,
            1e-12,
        )
        .unwrap()
    }

    fn surface(d: &[u64]) -> PolarizedAbelianVariety {
        let rows = [vec![c(0.31, 1.7), c(0.12, 0.4)], vec![c(0.12, 0.4), c(-0.22, 1.3)]];
        validate_polarized(PeriodMatrix::from_rows(&rows), PolarizationType::new(d.to_vec()), true, 1e-12).unwrap()
    }

    fn random_z(rng: &mut ChaCha8Rng, g: usize) -> Vec<Complex64> {
        (0..g).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn automorphy_factor_basics() {
        let p = elliptic(3);
        let t = Theta::new(&p);
        let z = [c(0.3, -0.2)];
        assert_eq!(automorphy_factor(&t, 2, &[0], &[3], &z).unwrap(), c(1.0, 0.0));
        assert_eq!(automorphy_factor(&t, 2, &[0], &[0], &z).unwrap(), c(1.0, 0.0));
        assert!(matches!(automorphy_factor(&t, 1, &[0], &[1], &z), Err(Error::NotLatticeVector)));
    }

    #[test]
    fn cocycle_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = surface(&[1, 2]);
        let t = Theta::new(&p);
        for _ in 0..20 {
            let a1 = [rng.random_range(-2..=2), rng.random_range(-2..=2)];
            let a2 = [rng.random_range(-2..=2), rng.random_range(-2..=2)];
            let b1 = [rng.random_range(-2..=2), 2 * rng.random_range(-2..=2)];
            let b2 = [rng.random_range(-2..=2), 2 * rng.random_range(-2..=2)];
            let z = random_z(&mut rng, 2);
            let m = 2;
            let lam2 = shift(&t, &z, &[a2[0] as f64, a2[1] as f64], &[b2[0] as f64, b2[1] as f64]);
            let sum_a = [a1[0] + a2[0], a1[1] + a2[1]];
            let sum_b = [b1[0] + b2[0], b1[1] + b2[1]];
            let lhs = automorphy_factor(&t, m, &sum_a, &sum_b, &z).unwrap();
            let rhs = automorphy_factor(&t, m, &a1, &b1, &lam2).unwrap() * automorphy_factor(&t, m, &a2, &b2, &z).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * lhs.norm(), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn quasi_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [elliptic(2), surface(&[1, 2])] {
            let t = Theta::new(&p);
            let g = p.g();
            for m in 1..=3 {
                for idx in t.indices(m).unwrap() {
                    let a: Vec<f64> = (0..g).map(|_| rng.random_range(-2..=2) as f64).collect();
                    let b: Vec<f64> =
                        p.divisors().iter().map(|&d| (d as i64 * rng.random_range(-3..=3)) as f64).collect();
                    let z = random_z(&mut rng, g);
                    assert!(quasi_periodicity_residual(&t, &idx, &a, &b, &z).unwrap() < 1e-9);
                    assert_eq!(quasi_periodicity_residual(&t, &idx, &vec![0.0; g], &vec![0.0; g], &z).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn half_period_is_not_a_period() {
        let p = validate_polarized(
            PeriodMatrix::from_rows(&[vec![c(0.0, 1.0)]]),
            PolarizationType::new(vec![1]),
            true,
            1e-12,
        )
        .unwrap();
        let t = Theta::new(&p);
        let idx = t.indices(1).unwrap().remove(0);
        let r = quasi_periodicity_residual(&t, &idx, &[0.5], &[0.0], &[c(0.23, 0.11)]).unwrap();
        assert!(r > 0.1, "residual {r}");
    }

    #[test]
    fn translation_permutes_the_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = validate_polarized(
            PeriodMatrix::from_rows(&[vec![c(0.0, 1.0)]]),
            PolarizationType::new(vec![1]),
            true,
            1e-12,
        )
        .unwrap();
        let t = Theta::new(&p);
        let half = TorsionPoint::from_a(vec![Rational64::new(1, 2)], p.delta());
        let indices = t.indices(2).unwrap();
        let (to, _) = translate_action(&t, 2, &half, &indices[0]).unwrap();
        assert_eq!(to, indices[1]);
        let (back, _) = translate_action(&t, 2, &half, &indices[1]).unwrap();
        assert_eq!(back, indices[0]);
        for _ in 0..10 {
            let z = random_z(&mut rng, 1);
            for (from, to) in [(0, 1), (1, 0)] {
                let lhs = t.translate_normalized(&indices[from], &[0.5], &z).unwrap();
                let rhs = t.eval_normalized(&indices[to], &z).unwrap();
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
        let (same, _) = translate_action(&t, 2, &TorsionPoint::zero(1), &indices[1]).unwrap();
        assert_eq!(same, indices[1]);
        let third = TorsionPoint::from_a(vec![Rational64::new(1, 3)], p.delta());
        assert!(matches!(translate_action(&t, 2, &third, &indices[0]), Err(Error::NotInK1 { level: 2 })));
    }

    #[test]
    fn translations_compose_without_defect() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for p in [elliptic(1), surface(&[1, 2])] {
            let t = Theta::new(&p);
            let d = p.delta();
            let m = 2;
            let k = k_group(&p, m).unwrap();
            let indices = t.indices(m).unwrap();
            let z = random_z(&mut rng, p.g());
            for x in &k.k1 {
                for x2 in &k.k1 {
                    let sum = x.add(x2, d);
                    for idx in indices.iter().step_by(3) {
                        let (i1, _) = translate_action(&t, m, x2, idx).unwrap();
                        let (i2, _) = translate_action(&t, m, x, &i1).unwrap();
                        let (i3, _) = translate_action(&t, m, &sum, idx).unwrap();
                        assert_eq!(i2, i3);
                        // U_x U_x2 θ evaluated directly through both strip factors
                        let a = x.a_f64();
                        let a2 = x2.a_f64();
                        let shifted = shift(&t, &z, &a, &vec![0.0; a.len()]);
                        let inner = t.translate_normalized(idx, &a2, &shifted).unwrap();
                        let outer = inner * StripFactor::new(&t, m, a.clone()).phase(&z).conj();
                        let direct = t.translate_normalized(idx, &sum.a_f64(), &z).unwrap();
                        assert!((outer - direct).norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn theta_tilde_is_invariant_and_expands_as_the_all_ones_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [elliptic(1), surface(&[1, 1])] {
            let t = Theta::new(&p);
            for n in 2..=3 {
                let k = k_group(&p, n).unwrap();
                let indices = t.indices(n).unwrap();
                for _ in 0..5 {
                    let z = random_z(&mut rng, p.g());
                    let base = t.theta_tilde_normalized(n, &z).unwrap();
                    for x in &k.k1 {
                        let moved = t.theta_tilde_translate_normalized(n, &x.a_f64(), &z).unwrap();
                        assert!((moved - base).norm() < 1e-10);
                    }
                    let sum: Complex64 = indices.iter().map(|i| t.eval_normalized(i, &z).unwrap()).sum();
                    assert!((sum - base).norm() < 1e-10);
                }
            }
            // n = 1 is θ itself
            let z = random_z(&mut rng, p.g());
            let idx = t.indices(1).unwrap().remove(0);
            assert!((t.theta_tilde_normalized(1, &z).unwrap() - t.eval_normalized(&idx, &z).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn theta_tilde_obeys_the_level_n_cocycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let p = surface(&[1, 1]);
        let t = Theta::new(&p);
        for n in 2..=3u64 {
            for _ in 0..10 {
                let a: Vec<f64> = (0..2).map(|_| rng.random_range(-1..=1) as f64).collect();
                let b: Vec<f64> = (0..2).map(|_| rng.random_range(-2..=2) as f64).collect();
                let z = random_z(&mut rng, 2);
                let lhs = t.theta_tilde_impl(n, &shift(&t, &z, &a, &b), false).unwrap();
                let base = t.theta_tilde_impl(n, &z, false).unwrap();
                let phase = StripFactor::new(&t, n, a.clone()).phase(&z);
                assert!((lhs - phase * base).norm() / (1.0 + base.norm()) < 1e-9);
            }
        }
        let raw = invariant_theta_tilde(&t, 2, &[c(0.1, 0.2), c(0.0, -0.1)]).unwrap();
        assert!(raw.norm().is_finite());
        assert!(matches!(invariant_theta_tilde(&Theta::new(&surface(&[1, 2])), 2, &[c(0.0, 0.0); 2]), Err(Error::NotPrincipal(_))));
    }
}
