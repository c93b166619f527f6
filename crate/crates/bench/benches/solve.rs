use capspec_bench::cases;
use capspec_core::model::{jacobian_flat, residual_flat};
use capspec_core::{
    cheb_points, continuation_solve, diffmat, initial_guess, select_formulation, Discretization, SolverConfig,
};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("diffmat");
    for n in [15, 43, 127, 379] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| black_box(diffmat(n - 1, n, 1).unwrap()))
        });
    }
    group.finish();
}

fn linearization(c: &mut Criterion) {
    let (_, spec) = cases()[2];
    let mut group = c.benchmark_group("residual_jacobian");
    for n in [15, 43, 127] {
        let grid = cheb_points(n).unwrap();
        let disc = Discretization::new(n).unwrap();
        let v = initial_guess(&spec, &grid, spec.psi_a, spec.psi_b).unwrap().to_flat();
        let form = select_formulation(&spec);
        group.bench_with_input(BenchmarkId::new("residual", n), &v, |b, v| {
            b.iter(|| black_box(residual_flat(&spec, form, &disc, v).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("jacobian", n), &v, |b, v| {
            b.iter(|| black_box(jacobian_flat(&spec, form, &disc, v).unwrap()))
        });
    }
    group.finish();
}

fn solves(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("continuation_solve");
    group.sample_size(20);
    for (name, spec) in cases() {
        group.bench_function(name, |b| b.iter(|| black_box(continuation_solve(&spec, &cfg).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, operators, linearization, solves);
criterion_main!(benches);
