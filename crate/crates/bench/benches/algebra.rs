use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use freeharm_core::algebra::random_element_with;
use freeharm_core::{AlgElement, Guard, RandomParams, QC};

fn sample(terms: usize) -> AlgElement<QC> {
    let mut rng = ChaCha8Rng::seed_from_u64(terms as u64);
    let params = RandomParams {
        num_gens: 2,
        max_block_len: 2,
        max_exp: 1,
        num_terms: terms,
        ..RandomParams::default()
    };
    random_element_with(&mut rng, &params).unwrap()
}

fn convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("mul");
    for terms in [4, 16, 64] {
        let (x, y) = (sample(terms), sample(terms + 1));
        group.bench_with_input(BenchmarkId::from_parameter(terms), &terms, |b, _| {
            b.iter(|| black_box(&x) * black_box(&y))
        });
    }
    group.finish();
}

fn moments(c: &mut Criterion) {
    let guard = Guard::default();
    let mut group = c.benchmark_group("moment_2k");
    let x = sample(8);
    let xf = x.to_float();
    for k in [2, 3, 4] {
        group.bench_with_input(BenchmarkId::new("exact", k), &k, |b, &k| {
            b.iter(|| x.moment_2k(k, &guard).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("float", k), &k, |b, &k| {
            b.iter(|| xf.moment_2k(k, &guard).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, convolution, moments);
criterion_main!(benches);
