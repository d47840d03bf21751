//! Spanning of `P(H⁰(M^{n+1}))^∨` by the theta images of a finite subgroup.

use num_complex::Complex64;
use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::par::Exec;
use crate::theta::Theta;
use crate::torsion::{lex_vectors, TorsionPoint};

use super::mu::{numerical_rank, RANK_TOL};

#[derive(Debug, Clone)]
pub enum FiniteSubgroup {
    /// `(1/N)Λ/Λ`, of order `N^{2g}`.
    Torsion(u64),
    /// An explicitly listed set of points.
    Points(Vec<TorsionPoint>),
}

impl FiniteSubgroup {
    pub fn points(&self, theta: &Theta) -> Vec<Vec<Complex64>> {
        let pav = theta.pav();
        match self {
            FiniteSubgroup::Torsion(order) => {
                let g = pav.g();
                let n = *order as i64;
                lex_vectors(&vec![*order; 2 * g])
                    .into_iter()
                    .map(|k| {
                        let a = (0..g).map(|i| Rational64::new(k[i] as i64, n)).collect();
                        let b = (0..g).map(|i| Rational64::new(k[g + i] as i64 * pav.divisors()[i] as i64, n)).collect();
                        TorsionPoint::new(a, b, pav.delta()).to_complex(pav)
                    })
                    .collect()
            }
            FiniteSubgroup::Points(list) => list.iter().map(|p| p.to_complex(pav)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanningResult {
    pub rank: usize,
    /// `(n+1)^g`.
    pub required: usize,
    pub group_order: usize,
    pub singular_values: Vec<f64>,
}

impl SpanningResult {
    pub fn spans(&self) -> bool {
        self.rank == self.required
    }
}

/// Numerical rank of the evaluation vectors `(θ_α^{(n+1)}(b))_α`, `b ∈ G`.
pub fn spanning_check(theta: &Theta, n: u64, group: &FiniteSubgroup) -> Result<SpanningResult> {
    theta.pav().require_principal()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if let FiniteSubgroup::Torsion(0) = group {
        return Err(Error::InvalidArgument("torsion order must be positive".into()));
    }
    let points = group.points(theta);
    let values: CMatrix = theta.basis_matrix(n + 1, &points, Exec::default())?;
    let info = numerical_rank(&values, RANK_TOL);
    Ok(SpanningResult {
        rank: info.rank,
        required: values.ncols(),
        group_order: points.len(),
        singular_values: info.singular_values,
    })
}
