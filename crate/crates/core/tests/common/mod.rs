//! Direct, unoptimized implementations of the decision rules used as test
//! references. Nothing here goes through the crate's cached matrices.
#![allow(dead_code)]

use hdlss_core::{BlockPartition, Dataset, DissimilaritySpec, GammaKind, PhiKind};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gamma(kind: GammaKind, t: f64) -> f64 {
    match kind {
        GammaKind::Identity => t,
        GammaKind::OneMinusExpNeg => 1.0 - (-t).exp(),
        GammaKind::HalfSqrt => t.sqrt() / 2.0,
        GammaKind::Log1p => (1.0 + t).ln(),
    }
}

pub fn phi(kind: PhiKind, t: f64) -> f64 {
    match kind {
        PhiKind::Identity => t,
        PhiKind::Sqrt => t.sqrt(),
    }
}

pub fn h(spec: DissimilaritySpec, blocks: &[Vec<usize>], u: &[f64], v: &[f64]) -> f64 {
    let total: f64 = blocks
        .iter()
        .map(|c| {
            let sq: f64 = c.iter().map(|&i| (u[i] - v[i]).powi(2)).sum();
            gamma(spec.gamma, sq / c.len() as f64)
        })
        .sum();
    phi(spec.phi, total / blocks.len() as f64)
}

pub fn singletons(d: usize) -> Vec<Vec<usize>> {
    (0..d).map(|i| vec![i]).collect()
}

fn rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Class average of `h(z, ·)`, minus half the within-class average when `adjusted`.
pub fn avg_predict(
    train: &Dataset,
    spec: DissimilaritySpec,
    blocks: &[Vec<usize>],
    adjusted: bool,
    z: &[f64],
) -> usize {
    let x = rows(train.features());
    let y = train.labels();
    let mut best = (f64::INFINITY, 0);
    for j in 0..train.num_classes() {
        let idx: Vec<usize> = (0..x.len()).filter(|&i| y[i] == j).collect();
        let mean = idx.iter().map(|&i| h(spec, blocks, z, &x[i])).sum::<f64>() / idx.len() as f64;
        let mut within = 0.0;
        let mut pairs = 0.0;
        for &a in &idx {
            for &b in &idx {
                if a != b {
                    within += h(spec, blocks, &x[a], &x[b]);
                    pairs += 1.0;
                }
            }
        }
        let score = if adjusted { mean - within / pairs / 2.0 } else { mean };
        if score < best.0 {
            best = (score, j);
        }
    }
    best.1
}

/// 1-NN on `h` itself, or on the mean absolute difference of dissimilarities.
pub fn nn_predict(
    train: &Dataset,
    spec: DissimilaritySpec,
    blocks: &[Vec<usize>],
    madd: bool,
    z: &[f64],
) -> usize {
    let x = rows(train.features());
    let n = x.len();
    let hz: Vec<f64> = x.iter().map(|xi| h(spec, blocks, z, xi)).collect();
    let mut best = (f64::INFINITY, usize::MAX);
    for i in 0..n {
        let score = if madd {
            (0..n)
                .filter(|&k| k != i)
                .map(|k| (hz[k] - h(spec, blocks, &x[i], &x[k])).abs())
                .sum::<f64>()
                / (n - 1) as f64
        } else {
            hz[i]
        };
        let label = train.labels()[i];
        if score < best.0 || (score == best.0 && label < best.1) {
            best = (score, label);
        }
    }
    best.1
}

/// Two Gaussian classes that differ in location and scale on every coordinate.
pub fn gaussian_classes(n: [usize; 2], d: usize, seed: u64) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let params = [(0.0, 1.0), (0.3, 1.3)];
    let total = n[0] + n[1];
    let mut x = Array2::zeros((total, d));
    let mut labels = Vec::with_capacity(total);
    let mut row = 0;
    for (j, &(mu, sd)) in params.iter().enumerate() {
        for _ in 0..n[j] {
            for c in 0..d {
                let e: f64 = StandardNormal.sample(&mut r);
                x[[row, c]] = mu + sd * e;
            }
            labels.push(j);
            row += 1;
        }
    }
    Dataset::new(x, labels).unwrap()
}

/// Queries drawn half from each class.
pub fn gaussian_queries(count: usize, d: usize, seed: u64) -> Array2<f64> {
    gaussian_classes([count / 2, count - count / 2], d, seed).features().clone()
}

pub fn random_partition(d: usize, seed: u64) -> BlockPartition {
    use rand::seq::SliceRandom;
    use rand::Rng;
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(&mut r);
    let mut blocks = Vec::new();
    let mut at = 0;
    while at < d {
        let size = r.random_range(1..=4).min(d - at);
        blocks.push(order[at..at + size].to_vec());
        at += size;
    }
    BlockPartition::new(blocks, d).unwrap()
}
