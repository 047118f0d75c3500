//! Batched dissimilarity kernels.
//!
//! Evaluating `h` for every (test, train) and (train, train) pair dominates
//! the cost of every classifier here. The kernels below reorder the feature
//! columns once so that each block is contiguous, then compute the inner mean
//! `b⁻¹ Σ γ(·)` for all pairs. The outer φ is applied separately, which lets
//! callers share one γ-mean matrix between φ choices.

use ndarray::{Array2, ArrayView2};

use crate::dissimilarity::{BlockPartition, DissimilaritySpec, GammaKind, PhiKind};
use crate::exec;

/// Column order and block boundaries for a [`BlockPartition`].
#[derive(Debug, Clone)]
pub struct BlockLayout {
    order: Vec<usize>,
    offsets: Vec<usize>,
    inv_sizes: Vec<f64>,
    singletons: bool,
}

impl BlockLayout {
    pub fn new(partition: &BlockPartition) -> Self {
        let mut order = Vec::with_capacity(partition.dim());
        let mut offsets = Vec::with_capacity(partition.num_blocks() + 1);
        let mut inv_sizes = Vec::with_capacity(partition.num_blocks());
        offsets.push(0);
        for block in partition.blocks() {
            order.extend_from_slice(block);
            offsets.push(order.len());
            inv_sizes.push(1.0 / block.len() as f64);
        }
        // Singletons in natural order need no reordering at all.
        let singletons = partition.is_singletons() && order.iter().enumerate().all(|(i, &c)| i == c);
        BlockLayout {
            order,
            offsets,
            inv_sizes,
            singletons,
        }
    }

    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.inv_sizes.len()
    }

    /// Copies `x` with its columns reordered into block order (a no-op copy
    /// for the natural singleton layout).
    pub fn arrange(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(x.ncols(), self.dim(), "feature dimension does not match layout");
        if self.singletons {
            return x.as_standard_layout().into_owned();
        }
        let mut out = Array2::<f64>::zeros((x.nrows(), self.dim()));
        for (mut dst, src) in out.rows_mut().into_iter().zip(x.rows()) {
            for (d, &c) in dst.iter_mut().zip(&self.order) {
                *d = src[c];
            }
        }
        out
    }

    /// Reorders a single vector into block order.
    pub fn arrange_vec(&self, v: &[f64]) -> Vec<f64> {
        self.order.iter().map(|&c| v[c]).collect()
    }

    /// `b⁻¹ Σ_C γ(|C|⁻¹ ‖u_C − v_C‖²)` for two vectors already in block order.
    #[inline]
    pub fn gamma_mean(&self, gamma: GammaKind, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim());
        debug_assert_eq!(v.len(), self.dim());
        let mut sum = 0.0;
        if self.singletons {
            for (a, b) in u.iter().zip(v) {
                let diff = a - b;
                sum += gamma.apply(diff * diff);
            }
        } else {
            for (w, &inv) in self.offsets.windows(2).zip(&self.inv_sizes) {
                let mut sq = 0.0;
                for (a, b) in u[w[0]..w[1]].iter().zip(&v[w[0]..w[1]]) {
                    let diff = a - b;
                    sq += diff * diff;
                }
                sum += gamma.apply(sq * inv);
            }
        }
        sum / self.num_blocks() as f64
    }

    /// Per-block scaled squared distances `|C|⁻¹ ‖u_C − v_C‖²`.
    pub fn block_sq_dists(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        for ((w, &inv), o) in self.offsets.windows(2).zip(&self.inv_sizes).zip(out.iter_mut()) {
            let mut sq = 0.0;
            for (a, b) in u[w[0]..w[1]].iter().zip(&v[w[0]..w[1]]) {
                let diff = a - b;
                sq += diff * diff;
            }
            *o = sq * inv;
        }
    }
}

/// γ-mean matrix between the rows of `a` and the rows of `b` (both in block order).
pub fn cross_gamma_means(
    gamma: GammaKind,
    layout: &BlockLayout,
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let (m, n) = (a.nrows(), b.nrows());
    let mut out = vec![0.0; m * n];
    if n > 0 {
        exec::for_each_chunk_mut(&mut out, n, |i, row| {
            let ai = a.row(i);
            let ai = ai.as_slice().expect("standard layout rows");
            for (j, o) in row.iter_mut().enumerate() {
                let bj = b.row(j);
                *o = layout.gamma_mean(gamma, ai, bj.as_slice().expect("standard layout rows"));
            }
        });
    }
    Array2::from_shape_vec((m, n), out).expect("shape matches")
}

/// Symmetric γ-mean matrix among the rows of `a` (block order), zero diagonal.
pub fn pairwise_gamma_means(
    gamma: GammaKind,
    layout: &BlockLayout,
    a: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let n = a.nrows();
    // Upper triangle computed row-parallel, then mirrored, so every entry is
    // evaluated once with the lower index first.
    let upper: Vec<Vec<f64>> = exec::map_indexed(n, |i| {
        let ai = a.row(i);
        let ai = ai.as_slice().expect("standard layout rows");
        (i + 1..n)
            .map(|j| {
                let aj = a.row(j);
                layout.gamma_mean(gamma, ai, aj.as_slice().expect("standard layout rows"))
            })
            .collect()
    });
    let mut out = Array2::<f64>::zeros((n, n));
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// Applies φ elementwise, turning a γ-mean matrix into an `h` matrix.
pub fn apply_phi(phi: PhiKind, means: &Array2<f64>) -> Array2<f64> {
    match phi {
        PhiKind::Identity => means.clone(),
        PhiKind::Sqrt => means.mapv(f64::sqrt),
    }
}

/// Convenience: the full `h` matrix between two row sets (natural column order).
pub fn cross_dissimilarities(
    spec: DissimilaritySpec,
    partition: &BlockPartition,
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let layout = BlockLayout::new(partition);
    let a = layout.arrange(a);
    let b = layout.arrange(b);
    apply_phi(spec.phi, &cross_gamma_means(spec.gamma, &layout, a.view(), b.view()))
}

/// Convenience: the symmetric `h` matrix among rows (natural column order).
pub fn pairwise_dissimilarities(
    spec: DissimilaritySpec,
    partition: &BlockPartition,
    a: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let layout = BlockLayout::new(partition);
    let a = layout.arrange(a);
    apply_phi(spec.phi, &pairwise_gamma_means(spec.gamma, &layout, a.view()))
}
