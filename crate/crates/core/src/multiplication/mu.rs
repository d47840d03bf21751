//! Matrices of `μ_n : H⁰(L) ⊗ H⁰(Lⁿ) → H⁰(L^{n+1})` and their rank verdicts.

use crate::error::{Error, Result};
use crate::linalg::{singular_values, CMatrix};
use crate::par::{map_indexed, Exec};
use crate::theta::Theta;

use super::sampling::{BasisFit, RESIDUAL_TOL};

/// Default relative rank tolerance.
pub const RANK_TOL: f64 = 1e-8;
/// Smallest `σ_rank / (tol·σ_max)` accepted for a `Surjective` verdict.
pub const MIN_GAP_RATIO: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct MuMatrix {
    pub n: u64,
    /// `h0(n+1) × h0(1)·h0(n)`; column `i·h0(n) + j` is the product of the
    /// `i`-th level-1 and `j`-th level-`n` basis elements.
    pub matrix: CMatrix,
    /// Largest interpolation residual over all columns.
    pub max_residual: f64,
    /// Condition number of the sampled level-`(n+1)` basis.
    pub condition: f64,
    pub seed_used: u64,
    pub samples: usize,
}

impl MuMatrix {
    pub fn target_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.ncols()
    }
}

pub fn mu_matrix(theta: &Theta, n: u64, seed: u64) -> Result<MuMatrix> {
    mu_matrix_with(theta, n, seed, Exec::default())
}

pub fn mu_matrix_with(theta: &Theta, n: u64, seed: u64, exec: Exec) -> Result<MuMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let fit = BasisFit::new(theta, n + 1, seed, exec)?;
    let points = &fit.samples.points;
    let level1 = theta.basis_matrix(1, points, exec)?;
    let level_n = if n == 1 { level1.clone() } else { theta.basis_matrix(n, points, exec)? };
    let (h1, hn) = (level1.ncols(), level_n.ncols());

    let columns = map_indexed(h1 * hn, exec, |col| {
        let (i, j) = (col / hn, col % hn);
        level1.column(i).component_mul(&level_n.column(j))
    });
    let rhs = CMatrix::from_columns(&columns);
    let (matrix, residuals) = fit.fit(&rhs);
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    if !(max_residual <= RESIDUAL_TOL) {
        return Err(Error::NotInSpan { level: n + 1, residual: max_residual });
    }
    Ok(MuMatrix {
        n,
        matrix,
        max_residual,
        condition: fit.condition(),
        seed_used: fit.samples.seed,
        samples: points.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// Decreasing.
    pub singular_values: Vec<f64>,
    /// No singular value lies within a decade of the threshold.
    pub gap: bool,
    pub threshold: f64,
}

/// `rank = #{σ_i > rel_tol·σ_max}`.
pub fn numerical_rank(matrix: &CMatrix, rel_tol: f64) -> RankInfo {
    let singular_values = singular_values(matrix);
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * sigma_max;
    if sigma_max == 0.0 {
        return RankInfo { rank: 0, singular_values, gap: true, threshold };
    }
    let rank = singular_values.iter().filter(|&&s| s > threshold).count();
    let gap = !singular_values.iter().any(|&s| s >= threshold / 10.0 && s <= threshold * 10.0);
    RankInfo { rank, singular_values, gap, threshold }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Surjective,
    NotSurjective,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurjectivityVerdict {
    pub kind: VerdictKind,
    pub n: u64,
    pub source_dim: usize,
    pub target_dim: usize,
    /// Decided by `h0(1)·h0(n) < h0(n+1)` without building the matrix.
    pub dimension_shortcut: bool,
    pub rank: Option<usize>,
    pub singular_values: Vec<f64>,
    /// `σ_rank / (tol·σ_max)`.
    pub gap_ratio: Option<f64>,
    pub gap: bool,
}

/// Source and target dimensions `(h0(1)·h0(n), h0(n+1))`.
pub fn mu_dimensions(theta: &Theta, n: u64) -> (u64, u64) {
    let deg = theta.delta().degree();
    let g = theta.g() as u32;
    let h = |m: u64| m.pow(g) * deg;
    (h(1) * h(n), h(n + 1))
}

pub fn surjectivity_verdict(theta: &Theta, n: u64, seed: u64) -> Result<SurjectivityVerdict> {
    if let Some(v) = dimension_verdict(theta, n) {
        return Ok(v);
    }
    let mu = mu_matrix(theta, n, seed)?;
    Ok(verdict_from_matrix(&mu))
}

/// `NotSurjective` when the source is too small, otherwise `None`.
pub fn dimension_verdict(theta: &Theta, n: u64) -> Option<SurjectivityVerdict> {
    let (source, target) = mu_dimensions(theta, n);
    (source < target).then(|| SurjectivityVerdict {
        kind: VerdictKind::NotSurjective,
        n,
        source_dim: source as usize,
        target_dim: target as usize,
        dimension_shortcut: true,
        rank: None,
        singular_values: Vec::new(),
        gap_ratio: None,
        gap: true,
    })
}

pub fn verdict_from_matrix(mu: &MuMatrix) -> SurjectivityVerdict {
    let info = numerical_rank(&mu.matrix, RANK_TOL);
    let target = mu.target_dim();
    let gap_ratio = (info.rank > 0 && info.threshold > 0.0)
        .then(|| info.singular_values[info.rank - 1] / info.threshold);
    let kind = if !info.gap {
        VerdictKind::Inconclusive
    } else if info.rank == target {
        if gap_ratio.is_some_and(|r| r > MIN_GAP_RATIO) {
            VerdictKind::Surjective
        } else {
            VerdictKind::Inconclusive
        }
    } else {
        VerdictKind::NotSurjective
    };
    SurjectivityVerdict {
        kind,
        n: mu.n,
        source_dim: mu.source_dim(),
        target_dim: target,
        dimension_shortcut: false,
        rank: Some(info.rank),
        singular_values: info.singular_values,
        gap_ratio,
        gap: info.gap,
    }
}

/// Surjectivity of `μ_n` must carry over to `μ_{n+1}`; vacuously true when
/// `μ_n` is not found surjective.
pub fn monotonicity_check(theta: &Theta, n: u64, seed: u64) -> Result<bool> {
    if surjectivity_verdict(theta, n, seed)?.kind != VerdictKind::Surjective {
        return Ok(true);
    }
    Ok(surjectivity_verdict(theta, n + 1, seed)?.kind == VerdictKind::Surjective)
}
