//! Canonical theta bases of `H⁰(A, Lᵐ)`.
//!
//! The level-`m` basis is
//! `θ_c^{(m)}(z) = Σ_{ℓ ∈ Z^g + c} exp(πi m ℓᵗΩℓ + 2πi m ℓᵗz)` for
//! `c ∈ (mΔ)⁻¹Z^g / Z^g`, with factor of automorphy
//! `e(Ωa + b, z) = exp(−πi m aᵗΩa − 2πi m aᵗz)`.
//!
//! Raw values grow like `exp(π m yᵗ(Im Ω)⁻¹y)` with `y = Im z`, so most of the
//! crate works with *normalized* values `ϑ = exp(−π m yᵗ(Im Ω)⁻¹y)·θ`. The
//! weights multiply across levels, so products of normalized sections are
//! normalized sections of the product bundle.

mod action;

pub use action::{
    automorphy_factor, invariant_theta_tilde, quasi_periodicity_residual, translate_action,
    StripFactor,
};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::abelian::{PolarizationType, PolarizedAbelianVariety};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::par::{try_map_indexed, Exec};
use crate::torsion::{check_size, lex_position, lex_vectors, DEFAULT_GROUP_CAP};

/// Largest box radius a plan accepts before reporting `TruncationOverflow`.
pub const DEFAULT_MAX_RADIUS: usize = 64;

/// `(m, c)` labelling the basis element `θ_c^{(m)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SectionIndex {
    m: u64,
    c: Vec<Rational64>,
}

impl SectionIndex {
    pub fn new(m: u64, c: Vec<Rational64>, delta: &PolarizationType) -> Result<Self> {
        if m == 0 || c.len() != delta.dim() {
            return Err(Error::InvalidArgument(format!("bad section index (m = {m}, c = {c:?})")));
        }
        let c: Vec<Rational64> = c.into_iter().map(|x| x - x.floor()).collect();
        for (x, &d) in c.iter().zip(delta.divisors()) {
            if !(x * (m * d) as i64).is_integer() {
                return Err(Error::InvalidArgument(format!(
                    "characteristic {c:?} is not in (mΔ)⁻¹Z^g for m = {m}"
                )));
            }
        }
        Ok(SectionIndex { m, c })
    }

    /// The full level-`m` index set, lexicographic in `k` where `c_i = k_i / (m d_i)`.
    pub fn all(m: u64, delta: &PolarizationType) -> Vec<SectionIndex> {
        let extents = extents(m, delta);
        lex_vectors(&extents)
            .into_iter()
            .map(|k| SectionIndex {
                m,
                c: k.iter().zip(&extents).map(|(&ki, &e)| Rational64::new(ki as i64, e as i64)).collect(),
            })
            .collect()
    }

    pub fn level(&self) -> u64 {
        self.m
    }

    pub fn c(&self) -> &[Rational64] {
        &self.c
    }

    pub fn c_f64(&self) -> Vec<f64> {
        self.c.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Position in [`SectionIndex::all`].
    pub fn position(&self, delta: &PolarizationType) -> usize {
        let extents = extents(self.m, delta);
        let k: Vec<u64> =
            self.c.iter().zip(&extents).map(|(x, &e)| (x * e as i64).to_integer() as u64).collect();
        lex_position(&k, &extents)
    }

    /// `c + a mod Z^g`; `a` must keep the index admissible.
    pub fn shifted(&self, a: &[Rational64], delta: &PolarizationType) -> Result<Self> {
        let c = self.c.iter().zip(a).map(|(x, y)| x + y).collect();
        SectionIndex::new(self.m, c, delta)
    }
}

fn extents(m: u64, delta: &PolarizationType) -> Vec<u64> {
    delta.divisors().iter().map(|&d| m * d).collect()
}

/// Box radii for the truncated lattice sums.
///
/// For a Gaussian of width parameter `s = m·λ_min(Im Ω)` the radius is
/// `R = ⌈√(ln(1/eps) / (π s)) + 2⌉` around the (reduced) center of the sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPlan {
    pub eps: f64,
    pub lambda_min: f64,
    pub max_radius: usize,
    /// 1 for normal use; 2 doubles every radius (convergence certificate).
    pub radius_multiplier: usize,
}

impl TruncationPlan {
    pub fn new(eps: f64, lambda_min: f64) -> Self {
        TruncationPlan { eps, lambda_min, max_radius: DEFAULT_MAX_RADIUS, radius_multiplier: 1 }
    }

    pub fn doubled(self) -> Self {
        TruncationPlan { radius_multiplier: self.radius_multiplier * 2, ..self }
    }

    /// Radius for a series whose quadratic form is `scale·Im Ω` with
    /// `scale = m` for the level-`m` basis.
    pub fn radius(&self, scale: f64) -> Result<usize> {
        let s = scale * self.lambda_min;
        let base = ((1.0 / self.eps).ln().max(1.0) / (PI * s)).sqrt() + 2.0;
        let required = base.ceil() as usize * self.radius_multiplier;
        if !base.is_finite() || required > self.max_radius * self.radius_multiplier {
            return Err(Error::TruncationOverflow {
                required: if base.is_finite() { required } else { usize::MAX },
                capacity: self.max_radius * self.radius_multiplier,
            });
        }
        Ok(required)
    }

    pub fn radius_for_level(&self, m: u64) -> Result<usize> {
        self.radius(m as f64)
    }
}

/// Period data of `Ω` with the pieces the series needs.
#[derive(Debug, Clone)]
pub(crate) struct Period {
    pub omega: DMatrix<Complex64>,
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
    pub im_inv: DMatrix<f64>,
}

impl Period {
    pub fn new(omega: &DMatrix<Complex64>) -> Self {
        let re = omega.map(|z| z.re);
        let im = omega.map(|z| z.im);
        let im_inv = im.clone().try_inverse().expect("Im Ω is positive definite");
        Period { omega: omega.clone(), re, im, im_inv }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Period::new(&(&self.omega * Complex64::new(s, 0.0)))
    }

    pub fn g(&self) -> usize {
        self.omega.nrows()
    }

    /// `a = (Im Ω)⁻¹ Im z` and `x = Re z`.
    pub fn coords(&self, z: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let g = self.g();
        let a = (0..g).map(|i| (0..g).map(|j| self.im_inv[(i, j)] * z[j].im).sum()).collect();
        let x = z.iter().map(|w| w.re).collect();
        (a, x)
    }

    /// `yᵗ(Im Ω)⁻¹y`.
    pub fn envelope_exponent(&self, z: &[Complex64]) -> f64 {
        let g = self.g();
        let mut s = 0.0;
        for i in 0..g {
            for j in 0..g {
                s += z[i].im * self.im_inv[(i, j)] * z[j].im;
            }
        }
        s
    }

    fn quad(m: &DMatrix<f64>, v: &[f64]) -> f64 {
        let g = v.len();
        let mut s = 0.0;
        for i in 0..g {
            let mut row = 0.0;
            for j in 0..g {
                row += m[(i, j)] * v[j];
            }
            s += v[i] * row;
        }
        s
    }

    /// Normalized value `exp(−π m yᵗY⁻¹y) Σ_{ℓ∈Z^g+c} exp(πi m ℓᵗΩℓ + 2πi m ℓᵗz)`.
    ///
    /// With `reduce`, `z` is first moved into the fundamental parallelotope by
    /// lattice translations and the automorphy phase is carried along.
    pub fn series(&self, m: f64, c: &[f64], z: &[Complex64], radius: usize, reduce: bool) -> Complex64 {
        let g = self.g();
        let (mut a, mut x) = self.coords(z);
        let mut angle = 0.0;
        if reduce {
            // z ↦ z − Ωk
            let k: Vec<f64> = a.iter().map(|v| v.round()).collect();
            if k.iter().any(|&v| v != 0.0) {
                for i in 0..g {
                    a[i] -= k[i];
                    for j in 0..g {
                        x[i] -= self.re[(i, j)] * k[j];
                    }
                }
                angle -= PI * m * (Self::quad(&self.re, &k) + 2.0 * dot(&k, &x));
            }
            // z ↦ z − j, j ∈ Z^g
            let j: Vec<f64> = x.iter().map(|v| v.round()).collect();
            if j.iter().any(|&v| v != 0.0) {
                for i in 0..g {
                    x[i] -= j[i];
                }
                let t: f64 = c.iter().zip(&j).map(|(ci, ji)| m * ci * ji).sum();
                angle += 2.0 * PI * (t - t.round());
            }
        }

        let center: Vec<f64> = (0..g).map(|i| (-a[i] - c[i]).round()).collect();
        let r = radius as i64;
        let side = (2 * r + 1) as usize;
        let total = side.pow(g as u32);
        let mut off = vec![-r; g];
        let mut ell = vec![0.0; g];
        let mut w = vec![0.0; g];
        let mut sum = Complex64::new(0.0, 0.0);
        for _ in 0..total {
            for i in 0..g {
                ell[i] = c[i] + center[i] + off[i] as f64;
                w[i] = ell[i] + a[i];
            }
            let re_exp = -PI * m * Self::quad(&self.im, &w);
            if re_exp > -745.0 {
                let im_exp = PI * m * (Self::quad(&self.re, &ell) + 2.0 * dot(&ell, &x));
                sum += Complex64::from_polar(re_exp.exp(), im_exp);
            }
            for i in (0..g).rev() {
                off[i] += 1;
                if off[i] <= r {
                    break;
                }
                off[i] = -r;
            }
        }
        if angle != 0.0 {
            sum *= Complex64::from_polar(1.0, angle);
        }
        sum
    }

}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Evaluator for the theta bases of one polarized abelian variety.
#[derive(Debug, Clone)]
pub struct Theta {
    pav: PolarizedAbelianVariety,
    period: Period,
    plan: TruncationPlan,
    group_cap: u64,
}

impl Theta {
    pub fn new(pav: &PolarizedAbelianVariety) -> Self {
        let plan = TruncationPlan::new(pav.eps(), pav.im_min_eigenvalue());
        Theta {
            pav: pav.clone(),
            period: Period::new(pav.omega().matrix()),
            plan,
            group_cap: DEFAULT_GROUP_CAP,
        }
    }

    pub fn with_plan(mut self, plan: TruncationPlan) -> Self {
        self.plan = plan;
        self
    }

    pub fn with_group_cap(mut self, cap: u64) -> Self {
        self.group_cap = cap;
        self
    }

    pub fn plan(&self) -> &TruncationPlan {
        &self.plan
    }

    pub fn pav(&self) -> &PolarizedAbelianVariety {
        &self.pav
    }

    pub fn delta(&self) -> &PolarizationType {
        self.pav.delta()
    }

    pub fn g(&self) -> usize {
        self.pav.g()
    }

    pub fn group_cap(&self) -> u64 {
        self.group_cap
    }

    pub(crate) fn period(&self) -> &Period {
        &self.period
    }

    /// `exp(−π m yᵗ(Im Ω)⁻¹y)`, the factor turning raw into normalized values.
    pub fn envelope(&self, m: u64, z: &[Complex64]) -> f64 {
        (-PI * m as f64 * self.period.envelope_exponent(z)).exp()
    }

    pub fn indices(&self, m: u64) -> Result<Vec<SectionIndex>> {
        check_size(m, &extents(m, self.delta()), self.group_cap)?;
        Ok(SectionIndex::all(m, self.delta()))
    }

    fn check_index(&self, idx: &SectionIndex) -> Result<()> {
        if idx.c.len() != self.g() {
            return Err(Error::InvalidArgument("section index has the wrong dimension".into()));
        }
        Ok(())
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.g() || z.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::InvalidArgument("evaluation point must be a finite g-vector".into()));
        }
        Ok(())
    }

    /// Normalized `ϑ_c^{(m)}(z)`, accurate to `eps` in absolute terms.
    pub fn eval_normalized(&self, idx: &SectionIndex, z: &[Complex64]) -> Result<Complex64> {
        self.check_index(idx)?;
        self.check_point(z)?;
        let radius = self.plan.radius_for_level(idx.m)?;
        Ok(self.period.series(idx.m as f64, &idx.c_f64(), z, radius, true))
    }

    /// Direct summation without lattice reduction (for moderate `Im z` only).
    pub fn eval_normalized_direct(&self, idx: &SectionIndex, z: &[Complex64]) -> Result<Complex64> {
        self.check_index(idx)?;
        self.check_point(z)?;
        let radius = self.plan.radius_for_level(idx.m)?;
        Ok(self.period.series(idx.m as f64, &idx.c_f64(), z, radius, false))
    }

    /// Raw `θ_c^{(m)}(z)`.
    pub fn eval(&self, idx: &SectionIndex, z: &[Complex64]) -> Result<Complex64> {
        let v = self.eval_normalized(idx, z)?;
        Ok(v / self.envelope(idx.m, z))
    }

    /// Normalized values of the whole level-`m` basis at each point:
    /// row `p` is `(ϑ_c^{(m)}(z_p))_c` in index order.
    pub fn basis_matrix(&self, m: u64, points: &[Vec<Complex64>], exec: Exec) -> Result<CMatrix> {
        let indices = self.indices(m)?;
        let radius = self.plan.radius_for_level(m)?;
        let chars: Vec<Vec<f64>> = indices.iter().map(SectionIndex::c_f64).collect();
        for z in points {
            self.check_point(z)?;
        }
        let rows = try_map_indexed(points.len(), exec, |p| {
            Ok::<_, Error>(
                chars.iter().map(|c| self.period.series(m as f64, c, &points[p], radius, true)).collect::<Vec<_>>(),
            )
        })?;
        Ok(CMatrix::from_fn(points.len(), indices.len(), |p, j| rows[p][j]))
    }

    /// Normalized `θ̃` at level `n`, the theta series of `Ω/n`.
    pub fn theta_tilde_normalized(&self, n: u64, z: &[Complex64]) -> Result<Complex64> {
        self.theta_tilde_impl(n, z, true)
    }

    pub(crate) fn theta_tilde_impl(&self, n: u64, z: &[Complex64], reduce: bool) -> Result<Complex64> {
        self.pav.require_principal()?;
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        self.check_point(z)?;
        let radius = self.plan.radius(1.0 / n as f64)?;
        let quotient = self.period.scaled(1.0 / n as f64);
        Ok(quotient.series(1.0, &vec![0.0; self.g()], z, radius, reduce))
    }

    /// Batch of normalized `θ̃` values.
    pub fn theta_tilde_batch(&self, n: u64, points: &[Vec<Complex64>], exec: Exec) -> Result<Vec<Complex64>> {
        try_map_indexed(points.len(), exec, |p| self.theta_tilde_normalized(n, &points[p]))
    }
}

/// Raw value `θ_c^{(m)}(z)` for the canonical basis element `idx`.
pub fn theta_basis_eval(pav: &PolarizedAbelianVariety, idx: &SectionIndex, z: &[Complex64]) -> Result<Complex64> {
    Theta::new(pav).eval(idx, z)
}
