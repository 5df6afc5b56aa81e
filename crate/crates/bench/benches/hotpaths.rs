//! Wall-time tracking for the paths that dominate real runs: the digit
//! evaluator at small and huge arguments, batch inversion, a full
//! Wolstenholme test at the first positive prime, the Bernoulli table build,
//! and two complete J_p enumerations.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use harmonic_padic::bernoulli::BernoulliTable;
use harmonic_padic::harmonic::harmonic_mod_pk;
use harmonic_padic::modular::batch_invert_u64;
use harmonic_padic::{jp_enumerate, wolstenholme_test, DigitsBaseP};
use num::BigUint;

fn bench_batch_inversion(c: &mut Criterion) {
    let p: u64 = 1_000_003;
    let xs: Vec<u64> = (1..=4096u64).collect();
    c.bench_function("batch_invert_u64/4096@1e6+3", |b| {
        b.iter(|| batch_invert_u64(black_box(&xs), black_box(p)))
    });
}

fn bench_digit_evaluator(c: &mut Criterion) {
    let small = DigitsBaseP::from_u64(5, 10_000);
    c.bench_function("harmonic_mod_pk/p5_n1e4_K12", |b| {
        b.iter(|| harmonic_mod_pk(black_box(&small), 12))
    });

    let huge: BigUint = "3546471722268916272".parse().expect("decimal");
    let huge = DigitsBaseP::from_biguint(11, &huge);
    c.bench_function("harmonic_mod_pk/p11_n3.5e18_K12", |b| {
        b.iter(|| harmonic_mod_pk(black_box(&huge), 12))
    });
}

fn bench_wolstenholme(c: &mut Criterion) {
    c.bench_function("wolstenholme_test/16843", |b| {
        b.iter(|| wolstenholme_test(black_box(16843)))
    });
}

fn bench_bernoulli_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("bernoulli_table");
    group.sample_size(10);
    group.bench_function("build_cap_600", |b| {
        b.iter_batched(|| (), |()| BernoulliTable::new(600), BatchSize::PerIteration)
    });
    group.finish();
}

fn bench_jp(c: &mut Criterion) {
    let mut group = c.benchmark_group("jp_enumerate");
    group.sample_size(10);
    group.bench_function("p5", |b| b.iter(|| jp_enumerate(black_box(5))));
    group.bench_function("p7", |b| b.iter(|| jp_enumerate(black_box(7))));
    group.finish();
}

criterion_group!(
    hotpaths,
    bench_batch_inversion,
    bench_digit_evaluator,
    bench_wolstenholme,
    bench_bernoulli_table,
    bench_jp
);
criterion_main!(hotpaths);
