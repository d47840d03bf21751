//! Polarized abelian varieties in normal form.
//!
//! The lattice is `Λ = ΩZ^g + ΔZ^g` with `Δ = diag(d_1, …, d_g)`, and the
//! alternating form `E` has matrix `[[0, Δ], [−Δ, 0]]` in that basis. Writing a
//! point of `V = C^g` as `Ωa + b` with real `a, b`, this is
//! `E(Ωa + b, Ωa′ + b′) = aᵗb′ − bᵗa′`.

mod bounds;

pub use bounds::{
    bound_prediction, itt_bound, surface_corollary_applies, surface_h0_from_geometric_genus,
    torelli_bound, Bound, BoundPrediction,
};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result, Violation};

/// Relative tolerance for the symmetry and positivity checks.
pub const VALIDATION_TOLERANCE: f64 = 1e-12;
/// Default target accuracy of theta evaluations.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Elementary divisors `(d_1, …, d_g)` of a polarization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolarizationType(Vec<u64>);

impl PolarizationType {
    /// Unchecked; [`validate_polarized`] reports a bad divisor chain.
    pub fn new(divisors: impl Into<Vec<u64>>) -> Self {
        PolarizationType(divisors.into())
    }

    pub fn principal(g: usize) -> Self {
        PolarizationType(vec![1; g])
    }

    pub fn divisors(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `d_1 ⋯ d_g`.
    pub fn degree(&self) -> u64 {
        self.0.iter().product()
    }

    pub fn is_principal(&self) -> bool {
        self.0.iter().all(|&d| d == 1)
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, &d) in self.0.iter().enumerate() {
            if d == 0 {
                out.push(Violation::BadDivisorChain { index: i, divisor: d, next: None });
                continue;
            }
            if let Some(&next) = self.0.get(i + 1) {
                if next != 0 && next % d != 0 {
                    out.push(Violation::BadDivisorChain { index: i, divisor: d, next: Some(next) });
                }
            }
        }
        out
    }
}

/// A `g × g` complex period matrix, unchecked until validation.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodMatrix(DMatrix<Complex64>);

impl PeriodMatrix {
    pub fn new(omega: DMatrix<Complex64>) -> Self {
        PeriodMatrix(omega)
    }

    /// Row-major entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        PeriodMatrix(DMatrix::from_fn(n, m, |i, j| rows[i].get(j).copied().unwrap_or_default()))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.0.map(|z| z.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.0.map(|z| z.im)
    }
}

/// `(A, L)` with `A = C^g / (ΩZ^g + ΔZ^g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedAbelianVariety {
    delta: PolarizationType,
    omega: PeriodMatrix,
    simple_asserted: bool,
    eps: f64,
    im_min_eigenvalue: f64,
}

impl PolarizedAbelianVariety {
    pub fn g(&self) -> usize {
        self.delta.dim()
    }

    pub fn delta(&self) -> &PolarizationType {
        &self.delta
    }

    pub fn divisors(&self) -> &[u64] {
        self.delta.divisors()
    }

    pub fn omega(&self) -> &PeriodMatrix {
        &self.omega
    }

    pub fn simple_asserted(&self) -> bool {
        self.simple_asserted
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Smallest eigenvalue of `Im Ω`.
    pub fn im_min_eigenvalue(&self) -> f64 {
        self.im_min_eigenvalue
    }

    pub fn is_principal(&self) -> bool {
        self.delta.is_principal()
    }

    pub(crate) fn require_principal(&self) -> Result<()> {
        if self.is_principal() {
            Ok(())
        } else {
            Err(Error::NotPrincipal(self.divisors().to_vec()))
        }
    }

    /// The point `Ωa + b` of `V`.
    pub fn point(&self, a: &[f64], b: &[f64]) -> Vec<Complex64> {
        let g = self.g();
        (0..g)
            .map(|i| {
                let mut z = Complex64::new(b[i], 0.0);
                for j in 0..g {
                    z += self.omega.0[(i, j)] * a[j];
                }
                z
            })
            .collect()
    }

    /// The alternating form on real coordinates: `E(Ωa + b, Ωa′ + b′) = aᵗb′ − bᵗa′`.
    pub fn alternating_form(&self, x: (&[f64], &[f64]), y: (&[f64], &[f64])) -> f64 {
        let (a, b) = x;
        let (a2, b2) = y;
        (0..self.g()).map(|i| a[i] * b2[i] - b[i] * a2[i]).sum()
    }
}

/// Checks every invariant and returns either the variety or the full list of violations.
///
/// The stored period matrix is symmetrized, which makes validation idempotent.
pub fn validate_polarized(
    omega: PeriodMatrix,
    delta: PolarizationType,
    simple_asserted: bool,
    eps: f64,
) -> Result<PolarizedAbelianVariety> {
    let mut violations = Vec::new();
    let (rows, cols) = omega.0.shape();
    let g = delta.dim();
    if g == 0 || rows != g || cols != g {
        violations.push(Violation::DimensionMismatch { omega_dim: (rows, cols), type_len: g });
    }
    violations.extend(delta.violations());
    if !(eps.is_finite() && eps > 0.0) {
        violations.push(Violation::BadAccuracy { eps });
    }

    let mut im_min_eigenvalue = f64::NAN;
    if rows == cols && rows > 0 {
        let mut finite = true;
        for i in 0..rows {
            for j in 0..cols {
                let z = omega.0[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    violations.push(Violation::NonFinite { row: i, col: j });
                    finite = false;
                }
            }
        }
        if finite {
            let scale = omega.0.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let tol = VALIDATION_TOLERANCE * scale;
            for i in 0..rows {
                for j in (i + 1)..cols {
                    let difference = (omega.0[(i, j)] - omega.0[(j, i)]).norm();
                    if difference > tol {
                        violations.push(Violation::NotSymmetric { row: i, col: j, difference });
                    }
                }
            }
            let im = omega.imag_part();
            let im_sym = (&im + im.transpose()) * 0.5;
            im_min_eigenvalue =
                SymmetricEigen::new(im_sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if !(im_min_eigenvalue > tol) {
                violations.push(Violation::NotPositiveDefinite { min_eigenvalue: im_min_eigenvalue });
            }
        }
    }

    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let sym = (&omega.0 + omega.0.transpose()) * Complex64::new(0.5, 0.0);
    Ok(PolarizedAbelianVariety {
        delta,
        omega: PeriodMatrix(sym),
        simple_asserted,
        eps,
        im_min_eigenvalue,
    })
}

/// `h⁰(A, Lᵐ) = m^g · d_1 ⋯ d_g`.
pub fn h0(pav: &PolarizedAbelianVariety, m: u64) -> u64 {
    assert!(m >= 1, "h0: level must be positive");
    m.pow(pav.g() as u32) * pav.delta.degree()
}
