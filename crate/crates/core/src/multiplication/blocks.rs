//! Character-block decomposition of `μ_n` under the normalized `K(L)_1`-action.
//!
//! `K(L)_1` acts on every level by shifting characteristics, and the action
//! commutes with multiplication because the level cocycles multiply. In the
//! joint eigenbasis (a discrete Fourier transform over `K(L)_1`) the matrix of
//! `μ_n` splits into one block per character.

use crate::error::Result;
use crate::linalg::CMatrix;
use crate::theta::{SectionIndex, Theta};
use crate::torsion::{characters_of, k_group_with_cap, CharacterTable, TorsionPoint};

use super::mu::{mu_matrix, numerical_rank, MuMatrix, RankInfo, RANK_TOL};

#[derive(Debug, Clone)]
pub struct GammaBlock {
    /// The character, as its label in `K(L)_2`.
    pub label: TorsionPoint,
    pub matrix: CMatrix,
    pub rank: RankInfo,
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: Vec<GammaBlock>,
    /// `(n+1)^g`.
    pub row_dim: usize,
    /// `‖off-block part‖_F / ‖μ_n‖_F` in the eigenbasis.
    pub off_block_mass: f64,
    pub total_rank: usize,
    pub block_rank_sum: usize,
}

pub fn gamma_blocks(theta: &Theta, n: u64, seed: u64) -> Result<BlockDecomposition> {
    let mu = mu_matrix(theta, n, seed)?;
    blocks_from_matrix(theta, &mu)
}

/// Eigenbasis of a permutation action of `K(L)_1` on an index set: column
/// `χ·reps + r` is `|H|^{-1/2} Σ_h conj(χ(h)) e_{orbit[r][h]}`.
fn eigenbasis(table: &CharacterTable, orbits: &[Vec<usize>], dim: usize) -> CMatrix {
    let order = table.group.order();
    let reps = orbits.len();
    let scale = 1.0 / (order as f64).sqrt();
    let mut f = CMatrix::zeros(dim, dim);
    for chi in 0..order {
        for (r, orbit) in orbits.iter().enumerate() {
            for (h, &target) in orbit.iter().enumerate() {
                f[(target, chi * reps + r)] = table.value(chi, h).conj() * scale;
            }
        }
    }
    f
}

pub fn blocks_from_matrix(theta: &Theta, mu: &MuMatrix) -> Result<BlockDecomposition> {
    let n = mu.n;
    let delta = theta.delta();
    let group = k_group_with_cap(theta.pav(), 1, theta.group_cap())?;
    let table = characters_of(theta.pav(), group)?;
    let shifts: Vec<_> = table.group.k1.iter().map(|x| x.a().to_vec()).collect();

    // target: orbit representatives have c_i = k_i / ((n+1) d_i) with k_i ≤ n
    let target = theta.indices(n + 1)?;
    let target_orbits: Vec<Vec<usize>> = target
        .iter()
        .filter(|idx| idx.c().iter().zip(delta.divisors()).all(|(c, &d)| (c * d as i64) < 1.into()))
        .map(|rep| shifts.iter().map(|a| rep.shifted(a, delta).map(|i| i.position(delta))).collect())
        .collect::<Result<_>>()?;

    // source: pairs (c, c′) with the diagonal action; representatives (0, c′)
    let level_n: Vec<SectionIndex> = theta.indices(n)?;
    let hn = level_n.len();
    let origin = theta.indices(1)?.remove(0);
    let source_orbits: Vec<Vec<usize>> = level_n
        .iter()
        .map(|rep| {
            shifts
                .iter()
                .map(|a| Ok(origin.shifted(a, delta)?.position(delta) * hn + rep.shifted(a, delta)?.position(delta)))
                .collect()
        })
        .collect::<Result<_>>()?;

    let ft = eigenbasis(&table, &target_orbits, mu.target_dim());
    let fs = eigenbasis(&table, &source_orbits, mu.source_dim());
    let transformed = ft.adjoint() * &mu.matrix * fs;

    let rows = target_orbits.len();
    let cols = source_orbits.len();
    let total = transformed.norm();
    let mut off = 0.0;
    for i in 0..transformed.nrows() {
        for j in 0..transformed.ncols() {
            if i / rows != j / cols {
                off += transformed[(i, j)].norm_sqr();
            }
        }
    }
    let blocks: Vec<GammaBlock> = (0..table.group.order())
        .map(|chi| {
            let matrix = transformed.view((chi * rows, chi * cols), (rows, cols)).into_owned();
            let rank = numerical_rank(&matrix, RANK_TOL);
            GammaBlock { label: table.label(chi).clone(), matrix, rank }
        })
        .collect();
    let total_rank = numerical_rank(&mu.matrix, RANK_TOL).rank;
    let block_rank_sum = blocks.iter().map(|b| b.rank.rank).sum();
    Ok(BlockDecomposition {
        blocks,
        row_dim: rows,
        off_block_mass: if total > 0.0 { off.sqrt() / total } else { 0.0 },
        total_rank,
        block_rank_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{validate_polarized, PeriodMatrix, PolarizationType};
    use num_complex::Complex64;

    fn theta(rows: &[Vec<Complex64>], d: &[u64]) -> Theta {
        Theta::new(&validate_polarized(PeriodMatrix::from_rows(rows), PolarizationType::new(d.to_vec()), true, 1e-12).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn principal_has_a_single_block() {
        let t = theta(&[vec![c(0.3, 1.1), c(0.2, 0.1)], vec![c(0.2, 0.1), c(-0.1, 0.9)]], &[1, 1]);
        let d = gamma_blocks(&t, 1, 4).unwrap();
        assert_eq!(d.blocks.len(), 1);
        assert_eq!(d.row_dim, 4);
        assert!(d.off_block_mass < 1e-12);
        assert_eq!(d.block_rank_sum, d.total_rank);
    }

    #[test]
    fn elliptic_degree_three_splits_into_three_blocks() {
        let t = theta(&[vec![c(0.1, 1.3)]], &[3]);
        let d = gamma_blocks(&t, 1, 9).unwrap();
        assert_eq!(d.blocks.len(), 3);
        assert_eq!(d.row_dim, 2);
        for b in &d.blocks {
            assert_eq!(b.matrix.shape(), (2, 3));
        }
        assert!(d.off_block_mass < 1e-8, "{}", d.off_block_mass);
        assert_eq!(d.block_rank_sum, d.total_rank);
        assert_eq!(d.total_rank, 6);
    }

    #[test]
    fn elliptic_degree_two_blocks_match_rank() {
        let t = theta(&[vec![c(0.0, 1.0)]], &[2]);
        let d = gamma_blocks(&t, 1, 2).unwrap();
        assert_eq!(d.blocks.len(), 2);
        assert!(d.off_block_mass < 1e-8);
        assert_eq!(d.block_rank_sum, d.total_rank);
        assert_eq!(d.total_rank, 3);
    }

    #[test]
    fn surface_type_one_two_blocks() {
        let t = theta(&[vec![c(0.05, 1.2), c(0.1, 0.2)], vec![c(0.1, 0.2), c(-0.2, 1.4)]], &[1, 2]);
        let d = gamma_blocks(&t, 1, 11).unwrap();
        assert_eq!(d.blocks.len(), 2);
        assert_eq!(d.row_dim, 4);
        assert!(d.off_block_mass < 1e-8);
        assert_eq!(d.block_rank_sum, d.total_rank);
    }
}
