use std::hint::black_box;

use avwc_core::capacity::{cr_capacity_avc, MINIMAX_TOL};
use avwc_core::codes::{max_leakage, random_binning_code, BinningMode, STATE_SEQ_CAP};
use avwc_core::sampling;
use avwc_core::scenarios::{blackwell_family, lambda_family};
use avwc_core::symmetrize::min_f;
use avwc_core::Channel;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn symmetrizability(c: &mut Criterion) {
    let mut group = c.benchmark_group("min_f");
    let lambda = lambda_family(0.5).unwrap().legitimate().clone();
    group.bench_function("lambda_0.5", |b| b.iter(|| min_f(black_box(&lambda)).unwrap()));
    for (states, inputs) in [(2, 3), (3, 3), (4, 4)] {
        let mut rng = sampling::substream(1, 0);
        let fam = sampling::family(&mut rng, states, inputs, 3);
        group.bench_with_input(
            BenchmarkId::new("random", format!("s{states}_x{inputs}")),
            &fam,
            |b, fam| b.iter(|| min_f(black_box(fam)).unwrap()),
        );
    }
    group.finish();
}

fn capacity(c: &mut Criterion) {
    let mut group = c.benchmark_group("cr_capacity");
    let black = blackwell_family();
    group.bench_function("blackwell", |b| {
        b.iter(|| cr_capacity_avc(black_box(&black), MINIMAX_TOL).unwrap())
    });
    for states in [2, 3] {
        let mut rng = sampling::substream(2, states as u64);
        let fam = sampling::family(&mut rng, states, 2, 3);
        group.bench_with_input(BenchmarkId::new("random", states), &fam, |b, fam| {
            b.iter(|| cr_capacity_avc(black_box(fam), MINIMAX_TOL).unwrap())
        });
    }
    group.finish();
}

fn leakage(c: &mut Criterion) {
    let mut group = c.benchmark_group("max_leakage");
    let reference = Channel::bsc(0.1).unwrap();
    let mut rng = sampling::substream(3, 0);
    let eve = sampling::family(&mut rng, 2, 2, 2);
    for n in [2, 3, 4] {
        let code = random_binning_code(n, 4, &reference, BinningMode::Subset, 7).unwrap();
        group.bench_with_input(BenchmarkId::new("binning", n), &code, |b, code| {
            b.iter(|| max_leakage(black_box(code), &eve, STATE_SEQ_CAP).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, symmetrizability, capacity, leakage);
criterion_main!(benches);
