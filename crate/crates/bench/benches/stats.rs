use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pbench_bench::{points, samples};
use pbench_core::stats::{click_density, composition_modes, ttest_independent};

fn ttest(c: &mut Criterion) {
    let a = samples(135, 10.0, 1);
    let b = samples(136, 25.0, 2);
    c.bench_function("ttest 135 vs 136", |bench| {
        bench.iter(|| ttest_independent(black_box(&a), black_box(&b)).unwrap())
    });
}

fn density(c: &mut Criterion) {
    let clicks = points(20, 3);
    c.bench_function("click density 600x400 r32 x20", |b| {
        b.iter(|| click_density(black_box(&clicks), 600, 400, 32.0).unwrap())
    });
}

fn modes(c: &mut Criterion) {
    let xs: Vec<f64> = points(200, 4).iter().map(|p| p.x).collect();
    c.bench_function("composition modes n=200", |b| {
        b.iter(|| composition_modes(black_box(&xs), 12.0).unwrap())
    });
}

criterion_group!(benches, ttest, density, modes);
criterion_main!(benches);
