use std::fmt;

use thiserror::Error;

/// One violated invariant found while validating a polarized abelian variety.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The divisor list is empty or does not match the size of the period matrix.
    DimensionMismatch { omega_dim: (usize, usize), type_len: usize },
    /// An entry of the period matrix is NaN or infinite.
    NonFinite { row: usize, col: usize },
    /// `|Ω_ij − Ω_ji|` exceeds the relative symmetry tolerance.
    NotSymmetric { row: usize, col: usize, difference: f64 },
    /// `Im Ω` has a non-positive eigenvalue (relative to the tolerance).
    NotPositiveDefinite { min_eigenvalue: f64 },
    /// `d_index` is zero or does not divide `d_{index+1}`.
    BadDivisorChain { index: usize, divisor: u64, next: Option<u64> },
    /// The requested accuracy is not a finite positive number.
    BadAccuracy { eps: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch { omega_dim, type_len } => write!(
                f,
                "DimensionMismatch: period matrix is {}x{} but the type has {} divisors",
                omega_dim.0, omega_dim.1, type_len
            ),
            Violation::NonFinite { row, col } => {
                write!(f, "NonFinite: omega[{row}][{col}] is not finite")
            }
            Violation::NotSymmetric { row, col, difference } => write!(
                f,
                "NotSymmetric: |omega[{row}][{col}] - omega[{col}][{row}]| = {difference:e}"
            ),
            Violation::NotPositiveDefinite { min_eigenvalue } => write!(
                f,
                "NotPositiveDefinite: smallest eigenvalue of Im(omega) is {min_eigenvalue:e}"
            ),
            Violation::BadDivisorChain { index, divisor, next } => match next {
                Some(next) => write!(
                    f,
                    "BadDivisorChain: d_{} = {divisor} does not divide d_{} = {next}",
                    index + 1,
                    index + 2
                ),
                None => write!(f, "BadDivisorChain: d_{} = {divisor} must be positive", index + 1),
            },
            Violation::BadAccuracy { eps } => {
                write!(f, "BadAccuracy: eps = {eps:e} must be finite and positive")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polarized abelian variety: {}", join(.0))]
    Invalid(Vec<Violation>),

    #[error("K(L^{level}) has {size} elements, above the cap of {cap}")]
    SizeLimit { level: u64, size: u128, cap: u64 },

    #[error("point is not in K(L^{level})")]
    NotTorsion { level: u64 },

    #[error("point is not in the required subgroup: {0}")]
    NotInGroup(String),

    #[error("point is not in K(L^{level})_1")]
    NotInK1 { level: u64 },

    #[error("vector is not in the period lattice")]
    NotLatticeVector,

    #[error("truncation radius {required} exceeds the plan capacity {capacity}")]
    TruncationOverflow { required: usize, capacity: usize },

    #[error("sample matrix condition number {condition:e} exceeds {cap:e} after {attempts} attempt(s)")]
    IllConditioned { condition: f64, cap: f64, attempts: usize },

    #[error("function is not in the span of the level-{level} basis (relative residual {residual:e})")]
    NotInSpan { level: u64, residual: f64 },

    #[error("coefficient fit residual {residual:e} exceeds {tolerance:e}")]
    FitResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("operation requires a principal polarization, got type {0:?}")]
    NotPrincipal(Vec<u64>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
