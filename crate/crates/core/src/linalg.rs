//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `σ_max / σ_min`, infinite for a rank-deficient or empty matrix.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Least-squares solver for an overdetermined system with a fixed design matrix.
pub struct LeastSquares {
    rows: usize,
    cols: usize,
    condition: f64,
    // x = V Σ⁻¹ Uᴴ b
    pinv: CMatrix,
    design: CMatrix,
}

impl LeastSquares {
    pub fn new(design: CMatrix) -> Self {
        let (rows, cols) = design.shape();
        let svd = design.clone().svd(true, true);
        let u = svd.u.expect("left singular vectors requested");
        let v_t = svd.v_t.expect("right singular vectors requested");
        let sigma = &svd.singular_values;
        let hi = sigma.iter().copied().fold(0.0_f64, f64::max);
        let lo = sigma.iter().copied().fold(f64::INFINITY, f64::min);
        let condition = if lo > 0.0 && cols <= rows { hi / lo } else { f64::INFINITY };
        let mut ut = u.adjoint();
        for (i, mut row) in ut.row_iter_mut().enumerate() {
            let s = sigma[i];
            let inv = if s > 0.0 { 1.0 / s } else { 0.0 };
            row *= Complex64::new(inv, 0.0);
        }
        let pinv = v_t.adjoint() * ut;
        LeastSquares { rows, cols, condition, pinv, design }
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Solves for every column of `rhs`; returns the coefficient matrix and
    /// the relative residual `‖Ax − b‖ / ‖b‖` of each column.
    pub fn solve(&self, rhs: &CMatrix) -> (CMatrix, Vec<f64>) {
        let x = &self.pinv * rhs;
        let fitted = &self.design * &x;
        let residuals = (0..rhs.ncols())
            .map(|j| {
                let b = rhs.column(j);
                let norm = b.norm();
                let err = (fitted.column(j) - b).norm();
                if norm > 0.0 {
                    err / norm
                } else {
                    err
                }
            })
            .collect();
        (x, residuals)
    }
}

/// Distance between the points of projective space spanned by `v` and `w`:
/// `min_{|s|=1} ‖v/‖v‖ − s·w/‖w‖‖`. Zero vectors are at distance 1 from
/// anything but another zero vector.
pub fn projective_distance(v: &[Complex64], w: &[Complex64]) -> f64 {
    assert_eq!(v.len(), w.len(), "projective_distance: length mismatch");
    let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nw = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if nv == 0.0 || nw == 0.0 {
        return if nv == nw { 0.0 } else { 1.0 };
    }
    let inner: Complex64 = v.iter().zip(w).map(|(a, b)| b.conj() * a).sum();
    let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
    v.iter()
        .zip(w)
        .map(|(a, b)| (a / nv - phase * b / nw).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn singular_values_are_sorted() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(5.0), c(3.0)]));
        assert_eq!(singular_values(&m), vec![5.0, 3.0, 1.0]);
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = CMatrix::from_fn(6, 3, |i, j| Complex64::new(((i + 1) * (j + 1) * (j + 1)) as f64, (i * i * j) as f64 - 1.0));
        let x = CMatrix::from_column_slice(3, 1, &[c(1.0), Complex64::new(0.0, 2.0), c(-3.0)]);
        let b = &a * &x;
        let ls = LeastSquares::new(a);
        let (sol, res) = ls.solve(&b);
        assert!((sol - x).norm() < 1e-12);
        assert!(res[0] < 1e-14);
    }

    #[test]
    fn projective_distance_ignores_scale() {
        let v = [c(1.0), Complex64::new(0.0, 2.0)];
        let w: Vec<_> = v.iter().map(|x| x * Complex64::new(-3.0, 7.0)).collect();
        assert!(projective_distance(&v, &w) < 1e-15);
        assert!(projective_distance(&v, &[c(1.0), c(0.0)]) > 0.1);
    }
}
