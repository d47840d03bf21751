//! The coefficient matrix `(c_{αβ})` of
//! `θ(u + nv)·θ̃(u − v) = Σ c_{αβ} θ_α^{(n+1)}(u) θ_β^{(n(n+1))}(v)`
//! on a principally polarized variety, and the map `b ↦ t_{nb}^*θ + t_{−b}^*θ̃`
//! into `|(n+1)θ|`.

use num_complex::Complex64;
use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::linalg::{projective_distance, singular_values, CMatrix, LeastSquares};
use crate::par::{try_map_indexed, Exec};
use crate::theta::{SectionIndex, Theta};
use crate::torsion::{crt_split, k_group_with_cap, TorsionPoint};

use super::sampling::{with_reseed, BasisFit, SampleSet, CONDITION_CAP, OVERSAMPLING, RESIDUAL_TOL};

#[derive(Debug, Clone)]
pub struct WirtingerMatrix {
    pub n: u64,
    /// Level `n+1` indices (rows), i.e. `K(M^{n+1})_1`.
    pub alphas: Vec<SectionIndex>,
    /// Level `n(n+1)` indices (columns), i.e. `K(M^{n(n+1)})_1`.
    pub betas: Vec<SectionIndex>,
    pub full: CMatrix,
    /// `C′`: columns restricted to `K(M^{n+1})_1 ⊂ K(M^{n(n+1)})_1`, `Ωk/(n+1) = Ω(nk)/(n(n+1))`.
    pub reduced: CMatrix,
    /// Column of `full` used for each column of `reduced`.
    pub reduced_columns: Vec<usize>,
    pub fit_residual: f64,
    /// `max |c_{αβ} − c_{α,β−γ}| / max |c|` over `β` and `γ ∈ K(M^n)_1`.
    pub relation_residual: f64,
    pub reduced_singular_values: Vec<f64>,
    pub condition: f64,
    pub seed_used: u64,
}

impl WirtingerMatrix {
    /// `σ_min / σ_max` of `C′`.
    pub fn reduced_sigma_ratio(&self) -> f64 {
        match (self.reduced_singular_values.first(), self.reduced_singular_values.last()) {
            (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
            _ => 0.0,
        }
    }

    /// `Σ_β c_{αβ} ϑ_β^{(n(n+1))}(b)` for every `α`.
    pub fn contract(&self, theta: &Theta, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let values: Vec<Complex64> = self.betas.iter().map(|beta| theta.eval_normalized(beta, b)).collect::<Result<_>>()?;
        Ok((0..self.alphas.len())
            .map(|a| (0..self.betas.len()).map(|j| self.full[(a, j)] * values[j]).sum())
            .collect())
    }
}

fn theta_index(theta: &Theta) -> Result<SectionIndex> {
    Ok(theta.indices(1)?.remove(0))
}

pub fn wirtinger_matrix(theta: &Theta, n: u64, seed: u64) -> Result<WirtingerMatrix> {
    wirtinger_matrix_with(theta, n, seed, Exec::default())
}

pub fn wirtinger_matrix_with(theta: &Theta, n: u64, seed: u64, exec: Exec) -> Result<WirtingerMatrix> {
    theta.pav().require_principal()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let level_a = n + 1;
    let level_b = n * (n + 1);
    let alphas = theta.indices(level_a)?;
    let betas = theta.indices(level_b)?;
    let (na, nb) = (alphas.len(), betas.len());
    let unknowns = na * nb;
    let pairs = OVERSAMPLING * unknowns;
    let base = theta_index(theta)?;

    let (solution, fit_residual, condition, seed_used) = with_reseed(seed, |s| {
        let samples = SampleSet::new(theta, 2 * pairs, s);
        let (us, vs) = samples.points.split_at(pairs);
        let ua = theta.basis_matrix(level_a, us, exec)?;
        let vb = theta.basis_matrix(level_b, vs, exec)?;
        // unknown β·na + α
        let design = CMatrix::from_fn(pairs, unknowns, |p, k| ua[(p, k % na)] * vb[(p, k / na)]);
        let solver = LeastSquares::new(design);
        if !(solver.condition() <= CONDITION_CAP) {
            return Err(Error::IllConditioned { condition: solver.condition(), cap: CONDITION_CAP, attempts: 1 });
        }
        let rhs = try_map_indexed(pairs, exec, |p| {
            let (u, v) = (&us[p], &vs[p]);
            let plus: Vec<Complex64> = u.iter().zip(v).map(|(x, y)| x + y * n as f64).collect();
            let minus: Vec<Complex64> = u.iter().zip(v).map(|(x, y)| x - y).collect();
            Ok::<_, Error>(theta.eval_normalized(&base, &plus)? * theta.theta_tilde_normalized(n, &minus)?)
        })?;
        let (x, residuals) = solver.solve(&CMatrix::from_column_slice(pairs, 1, &rhs));
        Ok((x, residuals[0], solver.condition(), s))
    })?;
    if !(fit_residual <= RESIDUAL_TOL) {
        return Err(Error::FitResidualTooLarge { residual: fit_residual, tolerance: RESIDUAL_TOL });
    }
    let full = CMatrix::from_fn(na, nb, |a, b| solution[(b * na + a, 0)]);

    let pav = theta.pav();
    let delta = pav.delta();
    let cap = theta.group_cap();
    let k_b = k_group_with_cap(pav, level_b, cap)?;
    let gammas = k_group_with_cap(pav, n, cap)?.k1;
    let scale = full.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut relation = 0.0_f64;
    for (j, beta) in k_b.k1.iter().enumerate() {
        let (gamma_part, _) = crt_split(pav, n, beta)?;
        debug_assert!(gammas.contains(&gamma_part));
        for gamma in &gammas {
            let moved = k_b.k1_index(&beta.sub(gamma, delta)).expect("K(M^n)_1 ⊂ K(M^{n(n+1)})_1");
            for a in 0..na {
                relation = relation.max((full[(a, j)] - full[(a, moved)]).norm());
            }
        }
    }
    let relation_residual = if scale > 0.0 { relation / scale } else { 0.0 };

    let reduced_columns: Vec<usize> = k_group_with_cap(pav, level_a, cap)?
        .k1
        .iter()
        .map(|bp| {
            let embedded = TorsionPoint::from_a(bp.a().to_vec(), delta);
            debug_assert!(bp.a().iter().all(|x| (x * Rational64::from_integer(level_a as i64)).is_integer()));
            k_b.k1_index(&embedded).expect("K(M^{n+1})_1 ⊂ K(M^{n(n+1)})_1")
        })
        .collect();
    let reduced = CMatrix::from_fn(na, na, |a, k| full[(a, reduced_columns[k])]);
    let reduced_singular_values = singular_values(&reduced);

    Ok(WirtingerMatrix {
        n,
        alphas,
        betas,
        full,
        reduced,
        reduced_columns,
        fit_residual,
        relation_residual,
        reduced_singular_values,
        condition,
        seed_used,
    })
}

/// The map `b ↦ t_{nb}^*θ + t_{−b}^*θ̃ ∈ |(n+1)θ|` in coordinates of the level-`(n+1)` basis.
pub struct PhiMap<'a> {
    theta: &'a Theta,
    n: u64,
    fit: BasisFit,
    tilde_scale: Complex64,
}

impl<'a> PhiMap<'a> {
    pub fn new(theta: &'a Theta, n: u64, seed: u64) -> Result<Self> {
        theta.pav().require_principal()?;
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let fit = BasisFit::new(theta, n + 1, seed, Exec::default())?;
        Ok(PhiMap { theta, n, fit, tilde_scale: Complex64::new(1.0, 0.0) })
    }

    /// Replaces `θ̃` by `scale·θ̃`; the image in projective space is unchanged.
    pub fn with_tilde_scale(mut self, scale: Complex64) -> Self {
        self.tilde_scale = scale;
        self
    }

    /// Coefficients of `u ↦ θ(u + nb)·θ̃(u − b)`, up to a factor depending on `b` only.
    pub fn coords(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let theta = self.theta;
        let n = self.n;
        let base = theta_index(theta)?;
        let points = &self.fit.samples.points;
        let values = try_map_indexed(points.len(), Exec::default(), |p| {
            let u = &points[p];
            let plus: Vec<Complex64> = u.iter().zip(b).map(|(x, y)| x + y * n as f64).collect();
            let minus: Vec<Complex64> = u.iter().zip(b).map(|(x, y)| x - y).collect();
            Ok::<_, Error>(theta.eval_normalized(&base, &plus)? * theta.theta_tilde_normalized(n, &minus)? * self.tilde_scale)
        })?;
        Ok(self.fit.expand_values(&values)?.coefficients)
    }
}

pub fn phi_map_coords(theta: &Theta, n: u64, b: &[Complex64], seed: u64) -> Result<Vec<Complex64>> {
    PhiMap::new(theta, n, seed)?.coords(b)
}

/// Projective distance between `φ(b)` and the image of `b` under the
/// level-`(n+1)` theta map followed by the form `C`.
pub fn diagram_check(theta: &Theta, wirtinger: &WirtingerMatrix, b: &[Complex64], seed: u64) -> Result<f64> {
    let phi = PhiMap::new(theta, wirtinger.n, seed)?;
    diagram_residual(&phi, theta, wirtinger, b)
}

pub fn diagram_residual(phi: &PhiMap<'_>, theta: &Theta, wirtinger: &WirtingerMatrix, b: &[Complex64]) -> Result<f64> {
    let lhs = phi.coords(b)?;
    let rhs = wirtinger.contract(theta, b)?;
    Ok(projective_distance(&lhs, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{validate_polarized, PeriodMatrix, PolarizationType};
    use crate::multiplication::expand_in_basis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn principal(rows: &[Vec<Complex64>]) -> Theta {
        let g = rows.len();
        Theta::new(&validate_polarized(PeriodMatrix::from_rows(rows), PolarizationType::principal(g), true, 1e-12).unwrap())
    }

    /// Oracle: with these conventions `c_{αβ}` is 1 exactly when
    /// `α + nβ ∈ Z^g` and `α − β ∈ (1/n)Z^g`, and 0 otherwise.
    fn lattice_oracle(w: &WirtingerMatrix) -> CMatrix {
        let n = w.n as i64;
        CMatrix::from_fn(w.alphas.len(), w.betas.len(), |a, b| {
            let al = w.alphas[a].c();
            let be = w.betas[b].c();
            let hit = al.iter().zip(be).all(|(x, y)| (x + y * n).is_integer() && ((x - y) * n).is_integer());
            c(if hit { 1.0 } else { 0.0 }, 0.0)
        })
    }

    #[test]
    fn elliptic_n1_against_lattice_oracle() {
        let t = principal(&[vec![c(0.0, 1.0)]]);
        let w = wirtinger_matrix(&t, 1, 3).unwrap();
        assert_eq!(w.reduced.shape(), (2, 2));
        assert!(w.fit_residual < 1e-8);
        assert!(w.relation_residual < 1e-8);
        assert!(w.reduced_sigma_ratio() > 1e-6);
        let oracle = lattice_oracle(&w);
        let flat = |m: &CMatrix| m.iter().copied().collect::<Vec<_>>();
        assert!(projective_distance(&flat(&w.full), &flat(&oracle)) < 1e-8);
    }

    #[test]
    fn elliptic_n1_against_slice_expansion() {
        // Second route: for each sampled v expand u ↦ θ(u+v)θ(u−v) at level 2,
        // then solve W = C·Θ(v) for C.
        let t = principal(&[vec![c(0.13, 1.1)]]);
        let w = wirtinger_matrix(&t, 1, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let base = t.indices(1).unwrap().remove(0);
        let level2 = t.indices(2).unwrap();
        let vs: Vec<Vec<Complex64>> =
            (0..6).map(|_| vec![c(rng.random_range(0.0..1.0), 0.0) + c(0.13, 1.1) * rng.random_range(0.0..1.0)]).collect();
        let samples = SampleSet::new(&t, 8, 77);
        let mut coeffs = CMatrix::zeros(2, vs.len());
        for (j, v) in vs.iter().enumerate() {
            let e = expand_in_basis(
                &t,
                2,
                |u| Ok(t.eval_normalized(&base, &[u[0] + v[0]])? * t.eval_normalized(&base, &[u[0] - v[0]])?),
                &samples,
            )
            .unwrap();
            for a in 0..2 {
                coeffs[(a, j)] = e.coefficients[a];
            }
        }
        let theta_v = CMatrix::from_fn(2, vs.len(), |b, j| t.eval_normalized(&level2[b], &vs[j]).unwrap());
        // C = W Θᵀ(ΘΘᵀ)⁻¹ via least squares on the transposed system
        let ls = LeastSquares::new(theta_v.transpose());
        let (ct, res) = ls.solve(&coeffs.transpose());
        assert!(res.iter().all(|&r| r < 1e-8));
        let slice_c = ct.transpose();
        let flat = |m: &CMatrix| m.iter().copied().collect::<Vec<_>>();
        assert!(projective_distance(&flat(&w.full), &flat(&slice_c)) < 1e-8);
    }

    #[test]
    fn elliptic_n2_relations_and_diagram() {
        let t = principal(&[vec![c(-0.2, 1.3)]]);
        let w = wirtinger_matrix(&t, 2, 5).unwrap();
        assert_eq!(w.full.shape(), (3, 6));
        assert!(w.fit_residual < 1e-8 && w.relation_residual < 1e-8);
        assert!(w.reduced_sigma_ratio() > 1e-6);
        let flat = |m: &CMatrix| m.iter().copied().collect::<Vec<_>>();
        assert!(projective_distance(&flat(&w.full), &flat(&lattice_oracle(&w))) < 1e-8);

        let phi = PhiMap::new(&t, 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let b = vec![c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))];
            assert!(diagram_residual(&phi, &t, &w, &b).unwrap() < 1e-8);
        }
        assert!(diagram_check(&t, &w, &[c(0.0, 0.0)], 1).unwrap() < 1e-8);
    }

    #[test]
    fn phi_map_properties() {
        let t = principal(&[vec![c(0.0, 1.0)]]);
        let phi = PhiMap::new(&t, 1, 6).unwrap();
        let scaled = PhiMap::new(&t, 1, 6).unwrap().with_tilde_scale(c(7.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let b = vec![c(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))];
            let v = phi.coords(&b).unwrap();
            assert!(v.iter().map(|x| x.norm()).fold(0.0, f64::max) > 1e-6);
            let moved = vec![b[0] + c(2.0, 0.0) + c(0.0, -1.0)];
            assert!(projective_distance(&v, &phi.coords(&moved).unwrap()) < 1e-8);
            let s = scaled.coords(&b).unwrap();
            assert!(projective_distance(&v, &s) < 1e-12);
        }
        let at_zero = phi_map_coords(&t, 1, &[c(0.0, 0.0)], 6).unwrap();
        assert!(at_zero.iter().any(|x| x.norm() > 1e-3));
    }

    #[test]
    fn requires_principal_polarization() {
        let p = validate_polarized(
            PeriodMatrix::from_rows(&[vec![c(0.0, 1.0)]]),
            PolarizationType::new(vec![2]),
            true,
            1e-12,
        )
        .unwrap();
        assert!(matches!(wirtinger_matrix(&Theta::new(&p), 1, 0), Err(Error::NotPrincipal(_))));
    }
}
