//! Kernel timings on a single-thread pool against the default rayon pool.
//!
//! For a build with rayon compiled out entirely, run
//! `cargo bench -p hdlss-core --no-default-features`; the `pool-1` and
//! `pool-default` rows then coincide.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hdlss_core::gram::{self, BlockLayout};
use hdlss_core::loocv::{CutCandidates, DEFAULT_P_GRID};
use hdlss_core::{
    average_linkage, correlation_dissimilarity, BlockPartition, CorrelationMethod, Dataset, DissimilaritySpec,
    ExampleId, ExampleSpec, FittedModel, GammaKind, Method, PhiKind,
};
use rayon::{ThreadPool, ThreadPoolBuilder};

const D: usize = 1000;

fn pools() -> Vec<(&'static str, ThreadPool)> {
    vec![
        ("pool-1", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("pool-default", ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn sample(id: ExampleId, n: usize, seed: u64) -> Dataset {
    let ex = ExampleSpec::new(id, D).unwrap();
    let a = ex.generate(0, n, seed).unwrap();
    let b = ex.generate(1, n, seed + 1).unwrap();
    Dataset::from_class_blocks(&[a, b]).unwrap()
}

fn gamma_means(c: &mut Criterion) {
    let train = sample(ExampleId::Ex2, 50, 1);
    let test = sample(ExampleId::Ex2, 50, 7);
    let mut group = c.benchmark_group("gamma_means");
    group.sample_size(10);
    for part in [BlockPartition::singletons(D), BlockPartition::contiguous(D, 10).unwrap()] {
        let layout = BlockLayout::new(&part);
        let a = layout.arrange(train.features().view());
        let b = layout.arrange(test.features().view());
        let label = format!("b{}", part.num_blocks());
        for (name, pool) in &pools() {
            group.bench_with_input(BenchmarkId::new(format!("pairwise/{name}"), &label), &(), |bch, _| {
                bch.iter(|| pool.install(|| gram::pairwise_gamma_means(GammaKind::OneMinusExpNeg, &layout, black_box(a.view()))))
            });
            group.bench_with_input(BenchmarkId::new(format!("cross/{name}"), &label), &(), |bch, _| {
                bch.iter(|| {
                    pool.install(|| {
                        gram::cross_gamma_means(GammaKind::OneMinusExpNeg, &layout, black_box(b.view()), a.view())
                    })
                })
            });
        }
    }
    group.finish();
}

fn classify_batch(c: &mut Criterion) {
    let train = sample(ExampleId::Ex1, 50, 3);
    let test = sample(ExampleId::Ex1, 125, 9);
    let spec = DissimilaritySpec::new(GammaKind::OneMinusExpNeg, PhiKind::Identity);
    let mut group = c.benchmark_group("classify_batch");
    group.sample_size(10);
    for method in [Method::Gsavg, Method::NnGmadd] {
        let model = FittedModel::fit(train.clone(), method, spec, None, 1).unwrap();
        for (name, pool) in &pools() {
            group.bench_function(BenchmarkId::new(method.name(), name), |b| {
                b.iter(|| pool.install(|| model.classify_batch(black_box(test.features().view())).unwrap()))
            });
        }
    }
    group.finish();
}

fn clustering_and_loocv(c: &mut Criterion) {
    let train = sample(ExampleId::Ex3, 50, 5);
    let spec = DissimilaritySpec::new(GammaKind::OneMinusExpNeg, PhiKind::Identity);
    let mut group = c.benchmark_group("blocks");
    group.sample_size(10);
    for (name, pool) in &pools() {
        group.bench_function(BenchmarkId::new("dendrogram", name), |b| {
            b.iter(|| {
                pool.install(|| {
                    let m = correlation_dissimilarity(train.features().view(), CorrelationMethod::Pearson).unwrap();
                    average_linkage(m.matrix.view()).unwrap()
                })
            })
        });
    }
    let m = correlation_dissimilarity(train.features().view(), CorrelationMethod::Pearson).unwrap();
    let dendrogram = average_linkage(m.matrix.view()).unwrap();
    let candidates = CutCandidates::new(&dendrogram, &DEFAULT_P_GRID).unwrap();
    let grams: Vec<_> = candidates
        .partitions()
        .iter()
        .map(|p| gram::pairwise_dissimilarities(spec, p, train.features().view()))
        .collect();
    for method in [Method::Ggsavg, Method::NnGgmadd] {
        for (name, pool) in &pools() {
            group.bench_function(BenchmarkId::new(format!("loocv/{}", method.name()), name), |b| {
                b.iter(|| {
                    pool.install(|| {
                        candidates
                            .select(train.labels(), 2, method, 1, |s| Ok(grams[s].clone()))
                            .unwrap()
                    })
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, gamma_means, classify_batch, clustering_and_loocv);
criterion_main!(benches);
