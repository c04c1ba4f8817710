use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fractal_spectra::asymptotics::{renewal_solve, RenewalSystem};
use fractal_spectra::bgd::{analyze, bgd_preset, Realization};
use fractal_spectra::nalgebra::DMatrix;
use fractal_spectra::spectra::{decimate_sg, solve_dense};
use fractal_spectra::{BoundaryCondition, Counting};

fn decimation(c: &mut Criterion) {
    let mut g = c.benchmark_group("decimation");
    for m in [6, 8, 10] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| decimate_sg(m, BoundaryCondition::Dirichlet).unwrap())
        });
    }
    g.finish();
}

fn dense(c: &mut Criterion) {
    let sys = bgd_preset("sg-cut-bottom").unwrap();
    let mut g = c.benchmark_group("dense");
    g.sample_size(10);
    for n in [3, 4, 5] {
        let form = sys.domain_form(0, n, BoundaryCondition::Dirichlet, Realization::Boundary).unwrap();
        g.bench_with_input(BenchmarkId::new("cut-bottom", form.dim()), &form, |b, f| b.iter(|| solve_dense(f).unwrap()));
    }
    g.finish();
}

fn inertia(c: &mut Criterion) {
    let sys = bgd_preset("sg-thirds").unwrap();
    let mut g = c.benchmark_group("inertia_count");
    for depth in [12, 18, 24] {
        let counter = sys.domain_counter(0, depth, BoundaryCondition::Dirichlet, Realization::Boundary).unwrap();
        let x = 5f64.powf(depth as f64 / 2.0);
        g.bench_with_input(BenchmarkId::from_parameter(depth), &counter, |b, k| b.iter(|| k.count(black_box(x))));
    }
    g.finish();
}

fn analysis(c: &mut Criterion) {
    let mut g = c.benchmark_group("analyze");
    for name in ["sg-omega3", "snowflake-koch"] {
        let sys = bgd_preset(name).unwrap();
        g.bench_function(name, |b| b.iter(|| analyze(black_box(&sys)).unwrap()));
    }
    g.finish();
}

fn renewal(c: &mut Criterion) {
    let steps = 64;
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 0.0]) / 2f64.sqrt();
    let z = vec![(0..steps).map(|k| (k as f64 / steps as f64).sin()).collect(), vec![1.0; steps / 2]];
    let sys = RenewalSystem::new(a, 1.0, steps, z).unwrap();
    c.bench_function("renewal_solve/60T", |b| b.iter(|| renewal_solve(black_box(&sys), 60.0).unwrap()));
}

criterion_group!(benches, decimation, dense, inertia, analysis, renewal);
criterion_main!(benches);
