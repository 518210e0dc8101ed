//! Benchmarks for the hot paths: transforms, right-hand-side evaluation,
//! dyadic decomposition, and a short integration.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hks_core::besov::{besov_norm, dyadic_blocks, BesovIndex};
use hks_core::equation::{classical_params, rhs_unified, EquationVariant};
use hks_core::field::RealField;
use hks_core::grid::TorusGrid;
use hks_core::integrator::{integrate, MonitorSet, SolverConfig};
use hks_core::spectral::{bessel_potential, forward_transform, inverse_transform};

fn test_field(dim: usize, n: usize) -> RealField {
    let grid = TorusGrid::new(dim, n).unwrap();
    RealField::from_fn(grid, |x, y| {
        0.4 + 0.2 * x.sin() + 0.05 * (3.0 * x + y).cos() + 0.01 * (7.0 * x).sin()
    })
}

fn bench_transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_roundtrip");
    for (dim, n) in [(1usize, 256usize), (1, 1024), (2, 128)] {
        let f = test_field(dim, n);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{dim}d_n{n}")),
            &f,
            |b, f| {
                b.iter(|| {
                    let spec = forward_transform(f).unwrap();
                    inverse_transform(&spec).unwrap()
                })
            },
        );
    }
    group.finish();
}

fn bench_bessel(c: &mut Criterion) {
    let f = test_field(1, 1024);
    c.bench_function("bessel_potential_n1024", |b| {
        b.iter(|| bessel_potential(&f).unwrap())
    });
}

fn bench_rhs(c: &mut Criterion) {
    let f = test_field(1, 256);
    let p = classical_params();
    c.bench_function("rhs_unified_n256", |b| {
        b.iter(|| rhs_unified(&f, 0.0, &p).unwrap())
    });
}

fn bench_besov(c: &mut Criterion) {
    let f = test_field(1, 256);
    let idx = BesovIndex::critical(1);
    c.bench_function("dyadic_blocks_n256", |b| {
        b.iter(|| dyadic_blocks(&f).unwrap())
    });
    c.bench_function("besov_norm_n256", |b| {
        b.iter(|| besov_norm(&f, idx).unwrap())
    });
}

fn bench_integrate(c: &mut Criterion) {
    let f = test_field(1, 128);
    let cfg = SolverConfig {
        dt: 1e-2,
        dt_min: 1e-10,
        t_end: 0.2,
        cfl: 0.4,
        grad_blowup_threshold: 1e4,
        record_every: 5,
    };
    c.bench_function("integrate_classical_20steps_n128", |b| {
        b.iter(|| integrate(&f, &EquationVariant::Classical, &cfg, &MonitorSet::all(1)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_transforms,
    bench_bessel,
    bench_rhs,
    bench_besov,
    bench_integrate
);
criterion_main!(benches);
