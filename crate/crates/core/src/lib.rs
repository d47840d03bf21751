//! Numerical verification of multiplication-map surjectivity on polarized
//! abelian varieties given by a period matrix and a polarization type.
//!
//! The crate is layered bottom-up:
//! - [`abelian`]: validated varieties, section counts and the sufficient bounds;
//! - [`torsion`]: exact arithmetic in `K(Lᵐ)`, Weil pairing, characters;
//! - [`theta`]: theta bases, factor of automorphy, the normalized `K_1`-action
//!   and the invariant section `θ̃`;
//! - [`multiplication`]: the matrices of `μ_n`, their rank verdicts, the
//!   character-block decomposition and the Wirtinger coefficient matrix.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod abelian;
pub mod error;
pub mod linalg;
pub mod multiplication;
pub mod par;
pub mod theta;
pub mod torsion;

pub use abelian::{
    bound_prediction, h0, itt_bound, torelli_bound, validate_polarized, Bound, BoundPrediction, PeriodMatrix,
    PolarizationType, PolarizedAbelianVariety,
};
pub use error::{Error, Result, Violation};
pub use par::Exec;
pub use theta::{SectionIndex, Theta, TruncationPlan};
pub use torsion::{TorsionPoint, TorsionSubgroup};
