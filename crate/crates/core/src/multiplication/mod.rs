//! Multiplication maps between theta bases, decided numerically.
//!
//! Every section is handled through its values at random sample points and a
//! least-squares fit against the target basis; fits are accepted only with a
//! small residual and a bounded condition number.

mod blocks;
mod mu;
mod sampling;
mod spanning;
mod wirtinger;

pub use blocks::{blocks_from_matrix, gamma_blocks, BlockDecomposition, GammaBlock};
pub use mu::{
    dimension_verdict, monotonicity_check, mu_dimensions, mu_matrix, mu_matrix_with, numerical_rank,
    surjectivity_verdict, verdict_from_matrix, MuMatrix, RankInfo, SurjectivityVerdict, VerdictKind,
    MIN_GAP_RATIO, RANK_TOL,
};
pub use sampling::{
    attempt_seed, expand_in_basis, BasisFit, Expansion, SampleSet, CONDITION_CAP, MAX_ATTEMPTS, OVERSAMPLING,
    RESIDUAL_TOL,
};
pub use spanning::{spanning_check, FiniteSubgroup, SpanningResult};
pub use wirtinger::{
    diagram_check, diagram_residual, phi_map_coords, wirtinger_matrix, wirtinger_matrix_with, PhiMap,
    WirtingerMatrix,
};
