use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rwalks_core::ensemble::Execution;
use rwalks_core::ode::{integrate_batch, SimplexPoint};
use rwalks_core::stats::{ensemble_table, WalkBias};

fn modes() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel(None)),
    ]
}

fn walk_ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("lambda_star_ensemble");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new(name, "32x20000"), &exec, |b, &exec| {
            b.iter(|| ensemble_table(WalkBias::Multiplicative, black_box(&[1.8]), 32, 20_000, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn ode_batch(c: &mut Criterion) {
    let starts: Vec<SimplexPoint> = (1..=64)
        .map(|i| {
            let x = i as f64 / 80.0;
            SimplexPoint::normalize([x, 0.5, 1.0 - x]).unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("ode_batch");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new(name, "64 starts"), &exec, |b, &exec| {
            b.iter(|| integrate_batch(black_box(&starts), 2.0, 20.0, 1e-2, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, walk_ensemble, ode_batch);
criterion_main!(benches);
