use num_complex::Complex64;
use torelli_core::multiplication::{
    blocks_from_matrix, mu_matrix_with, surjectivity_verdict, verdict_from_matrix, VerdictKind,
};
use torelli_core::{validate_polarized, Exec, PeriodMatrix, PolarizationType, Theta};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn elliptic(d: u64, tau: Complex64) -> Theta {
    Theta::new(&validate_polarized(PeriodMatrix::from_rows(&[vec![tau]]), PolarizationType::new(vec![d]), true, 1e-12).unwrap())
}

fn surface(d: &[u64]) -> Theta {
    let rows = vec![vec![c(0.31, 1.7), c(-0.12, 0.35)], vec![c(-0.12, 0.35), c(0.05, 2.2)]];
    Theta::new(&validate_polarized(PeriodMatrix::from_rows(&rows), PolarizationType::new(d.to_vec()), true, 1e-12).unwrap())
}

#[test]
fn elliptic_curves_are_projectively_normal_from_degree_three() {
    for tau in [c(0.0, 1.0), c(0.5, 0.9), c(-0.37, 1.8)] {
        for d in 1..=6 {
            let v = surjectivity_verdict(&elliptic(d, tau), 1, d).unwrap();
            let expected = if d >= 3 { VerdictKind::Surjective } else { VerdictKind::NotSurjective };
            assert_eq!(v.kind, expected, "d = {d}, τ = {tau}");
            assert_eq!(v.dimension_shortcut, d == 1);
            if d == 2 {
                assert_eq!(v.rank, Some(3));
            }
        }
    }
}

#[test]
fn blocks_follow_the_polarization_type() {
    for (theta, n) in [(elliptic(5, c(0.1, 1.1)), 1), (elliptic(4, c(0.0, 1.3)), 2), (surface(&[2, 2]), 1), (surface(&[1, 3]), 1)] {
        let mu = mu_matrix_with(&theta, n, 3, Exec::default()).unwrap();
        let b = blocks_from_matrix(&theta, &mu).unwrap();
        let g = theta.g() as u32;
        assert_eq!(b.blocks.len() as u64, theta.delta().degree());
        assert_eq!(b.row_dim, (n + 1).pow(g) as usize);
        assert!(b.off_block_mass < 1e-8, "{}", b.off_block_mass);
        assert_eq!(b.block_rank_sum, b.total_rank);
        assert_eq!(b.total_rank, verdict_from_matrix(&mu).rank.unwrap());
    }
}

#[test]
fn schedule_does_not_change_the_matrix() {
    let theta = surface(&[2, 4]);
    let a = mu_matrix_with(&theta, 1, 5, Exec::Sequential).unwrap();
    let b = mu_matrix_with(&theta, 1, 5, Exec::Parallel).unwrap();
    assert_eq!(a.matrix, b.matrix);
    assert_eq!(verdict_from_matrix(&a), verdict_from_matrix(&b));
}
