use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use torelli_core::multiplication::{mu_matrix_with, SampleSet};
use torelli_core::{validate_polarized, Exec, PeriodMatrix, PolarizationType, Theta};

fn surface(d: &[u64]) -> Theta {
    let c = Complex64::new;
    let rows = vec![vec![c(0.3, 2.1), c(0.2, 0.4)], vec![c(0.2, 0.4), c(-0.1, 2.6)]];
    Theta::new(&validate_polarized(PeriodMatrix::from_rows(&rows), PolarizationType::new(d.to_vec()), true, 1e-12).unwrap())
}

fn modes() -> Vec<(&'static str, Exec)> {
    let mut modes = vec![("sequential", Exec::Sequential)];
    if cfg!(feature = "parallel") {
        modes.push(("parallel", Exec::Parallel));
    }
    modes
}

fn basis_matrix(c: &mut Criterion) {
    let theta = surface(&[3, 3]);
    let points = SampleSet::new(&theta, 72, 1).points;
    let mut group = c.benchmark_group("basis_matrix_level2_d33");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| theta.basis_matrix(2, &points, exec).unwrap())
        });
    }
    group.finish();
}

fn mu(c: &mut Criterion) {
    let theta = surface(&[3, 3]);
    let mut group = c.benchmark_group("mu1_d33");
    group.sample_size(20);
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| mu_matrix_with(&theta, 1, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, basis_matrix, mu);
criterion_main!(benches);
