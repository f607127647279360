use std::hint::black_box;

use anomex_core::detect::left_matrix_profile;
use anomex_core::explain::{explain_window, ExplainConfig};
use anomex_core::metrics::{dtw, nn_search, oed};
use anomex_core::series::znormalize_values;
use anomex_core::synth::{generate, SourceFamily, SourceSettings};
use anomex_core::TimeSeries;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn source(n: usize, seed: u64) -> Vec<f64> {
    generate(SourceFamily::Pulse, n, &SourceSettings::default(), &mut ChaCha8Rng::seed_from_u64(seed))
}

fn search(c: &mut Criterion) {
    let mut g = c.benchmark_group("nn_search");
    for n in [1_000, 10_000] {
        let train = source(n, 1);
        let query = source(100, 2);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| nn_search(black_box(&query), black_box(&train)).unwrap())
        });
    }
    g.finish();
}

fn profile(c: &mut Criterion) {
    let mut g = c.benchmark_group("left_matrix_profile");
    g.sample_size(10);
    for n in [1_000, 4_000] {
        let s = source(n, 3);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| left_matrix_profile(black_box(&s), 100, 100).unwrap())
        });
    }
    g.finish();
}

fn distances(c: &mut Criterion) {
    let mut g = c.benchmark_group("distances");
    for len in [100, 400] {
        let t = znormalize_values(&source(len, 4));
        let a = znormalize_values(&source(len, 5));
        g.bench_with_input(BenchmarkId::new("oed", len), &len, |b, _| {
            b.iter(|| oed(black_box(&t), black_box(&a)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("dtw", len), &len, |b, _| {
            b.iter(|| dtw(black_box(&t), black_box(&a), len / 10).unwrap())
        });
    }
    g.finish();
}

fn explanation(c: &mut Criterion) {
    let train = TimeSeries::new(source(1_500, 6)).unwrap();
    let mut values = source(1_000, 7);
    values[450] += 5.0;
    let test = TimeSeries::new(values).unwrap();
    let cfg = ExplainConfig::default();
    c.bench_function("explain_window/100", |b| {
        b.iter(|| explain_window(black_box(&test), 400, 100, black_box(&train), &cfg).unwrap())
    });
}

criterion_group!(benches, search, profile, distances, explanation);
criterion_main!(benches);
