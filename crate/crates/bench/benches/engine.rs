use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use diffinv::catalog::catalog;
use diffinv::experiments::{database_features, nn_classify_features};
use diffinv::independence::{jacobian_rank, linear_rank};
use diffinv_bench::*;

fn expansion(c: &mut Criterion) {
    let mut g = c.benchmark_group("chain_expansion");
    for (name, chain) in sample_chains() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &chain, |b, ch| b.iter(|| black_box(ch.polynomial())));
    }
    g.finish();
}

fn rank(c: &mut Criterion) {
    let cat = catalog();
    let ids = ir43_members();
    c.bench_function("linear_rank_ir43", |b| b.iter(|| black_box(linear_rank(cat, &ids))));
    c.bench_function("jacobian_rank_ir43", |b| b.iter(|| black_box(jacobian_rank(cat, &ids, 4))));
}

fn features(c: &mut Criterion) {
    let patch = texture_patch(1);
    let ex = ir43_extractor(12.0);
    c.bench_function("feature_vector_ir43_sigma12", |b| b.iter(|| black_box(ex.feature_vector(&patch).unwrap())));

    let db = small_db();
    let ex = ir43_extractor(8.0);
    let mut g = c.benchmark_group("database");
    g.sample_size(10);
    g.bench_function("features_and_nn_20_patches", |b| {
        b.iter(|| {
            let f = database_features(&db, &ex).unwrap();
            black_box(nn_classify_features(&db, &f).unwrap())
        })
    });
    g.finish();
}

criterion_group!(benches, expansion, rank, features);
criterion_main!(benches);
