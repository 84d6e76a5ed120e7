//! Kernel timings on a single-thread pool versus the default pool.
//!
//! With `--no-default-features` both groups run the sequential fallback,
//! which gives the baseline without rayon at all.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use tps_core::augment::tps_forecasting;
use tps_core::metrics::distribution_shift_report;
use tps_core::{reconstruct, split_time, unfold, SeriesBatch, TpsConfig};

fn batch(b: usize, t: usize, c: usize) -> SeriesBatch {
    SeriesBatch::from_fn(b, t, c, |b, t, c| {
        ((t as f64) * 0.13 + c as f64).sin() + 0.01 * ((b * 7919 + t * 31 + c) % 97) as f64
    })
    .unwrap()
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("1-thread", single), ("default", default)]
}

fn kernels(c: &mut Criterion) {
    let x = batch(32, 672, 7);
    let pair = split_time(&x, 336).unwrap();
    let cfg = TpsConfig::new(32, 5, 1.0).with_seed(1);
    let patches = unfold(&x, 32, 5).unwrap();
    let small = batch(32, 192, 7);
    let shifted = tps_forecasting(&split_time(&small, 96).unwrap(), &cfg).unwrap().concat();

    let mut group = c.benchmark_group("tps");
    group.sample_size(20);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("forecasting", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| tps_forecasting(black_box(&pair), &cfg).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("reconstruct", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| reconstruct(black_box(&patches), None).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("shift-report", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| distribution_shift_report(black_box(&small), &shifted).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
