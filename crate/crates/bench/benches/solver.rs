use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dcglearn::sim::{sample_pairs, ExperimentConfig, Oracle};
use dcglearn::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn training_pairs(n: usize) -> Vec<PreferencePair> {
    let cfg = ExperimentConfig { test_pairs: 0, validation_pairs: 0, ..ExperimentConfig::default() };
    let sampled = sample_pairs(&cfg, n, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    Oracle::new(&cfg).to_preference_pairs(&sampled.train).unwrap()
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    for n in [20, 200] {
        let pairs = training_pairs(n);
        group.bench_function(format!("{n}_pairs"), |b| b.iter(|| fit(black_box(&pairs), &FitConfig::default())));
    }
    group.finish();
}

fn factorization(c: &mut Criterion) {
    let w = fit(&training_pairs(200), &FitConfig::default()).unwrap();
    let matrix = WeightMatrix::from_utility(&w);
    c.bench_function("rank_one_10x5", |b| b.iter(|| rank_one_factorize(black_box(&matrix), 1e-12)));
}

fn coherence(c: &mut Criterion) {
    let set = LabeledSet::new(vec![1, 2, 3, 4, 5, 1, 2, 3], GradeScale::new(5).unwrap()).unwrap();
    let g = GainVector::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let gb = apply_power_transform(&g, 2.0).unwrap();
    let d = DiscountVector::logarithmic(8, 2.0).unwrap();
    c.bench_function("check_coherence_n8_k8", |b| b.iter(|| check_coherence(black_box(&set), &g, &gb, &d, 8)));
}

criterion_group!(benches, solver, factorization, coherence);
criterion_main!(benches);
