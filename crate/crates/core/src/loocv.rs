//! Leave-one-out selection of the dendrogram cut.
//!
//! The correlation dissimilarity and the dendrogram are computed once on the
//! full training sample. Only the classifier is refit in each fold, which
//! amounts to dropping one row and column of the training dissimilarity matrix.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::classifiers::{GeometryModel, Method};
use crate::clustering::{average_linkage, correlation_dissimilarity, CorrelationMethod, Dendrogram};
use crate::dataset::Dataset;
use crate::dissimilarity::{BlockPartition, DissimilaritySpec};
use crate::error::{Error, Result};
use crate::gram;

/// `{0, 0.1, …, 0.9, 1}`.
pub const DEFAULT_P_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Result of the cut search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSelection {
    pub p_grid: Vec<f64>,
    pub loocv_errors: Vec<f64>,
    pub chosen_p: f64,
    pub chosen_partition: BlockPartition,
}

/// The distinct partitions induced by a p grid on one dendrogram.
#[derive(Debug, Clone)]
pub struct CutCandidates {
    p_grid: Vec<f64>,
    partitions: Vec<BlockPartition>,
    slot: Vec<usize>,
}

impl CutCandidates {
    pub fn new(dendrogram: &Dendrogram, p_grid: &[f64]) -> Result<Self> {
        if p_grid.is_empty() {
            return Err(Error::Config("p grid is empty".into()));
        }
        let mut partitions: Vec<BlockPartition> = Vec::new();
        let mut slot = Vec::with_capacity(p_grid.len());
        for &p in p_grid {
            let part = dendrogram.cut_at_percentile(p)?;
            let idx = match partitions.iter().position(|q| *q == part) {
                Some(i) => i,
                None => {
                    partitions.push(part);
                    partitions.len() - 1
                }
            };
            slot.push(idx);
        }
        Ok(CutCandidates {
            p_grid: p_grid.to_vec(),
            partitions,
            slot,
        })
    }

    pub fn p_grid(&self) -> &[f64] {
        &self.p_grid
    }

    /// Distinct partitions, in order of first appearance along the grid.
    pub fn partitions(&self) -> &[BlockPartition] {
        &self.partitions
    }

    /// Index into [`partitions`](Self::partitions) for each grid entry.
    pub fn slots(&self) -> &[usize] {
        &self.slot
    }

    /// Runs the leave-one-out search. `gram_of(s)` must return the training
    /// dissimilarity matrix under partition `s` for the method's resolved spec.
    pub fn select<F>(
        &self,
        labels: &[usize],
        num_classes: usize,
        method: Method,
        k: usize,
        mut gram_of: F,
    ) -> Result<CutSelection>
    where
        F: FnMut(usize) -> Result<Array2<f64>>,
    {
        let mut per_partition = Vec::with_capacity(self.partitions.len());
        for s in 0..self.partitions.len() {
            let geometry = GeometryModel::new(gram_of(s)?, labels.to_vec(), num_classes, method, k)?;
            per_partition.push(geometry.leave_one_out_error()?);
        }
        let loocv_errors: Vec<f64> = self.slot.iter().map(|&s| per_partition[s]).collect();
        let mut best = 0;
        for i in 1..self.p_grid.len() {
            let (e, p) = (loocv_errors[i], self.p_grid[i]);
            let (eb, pb) = (loocv_errors[best], self.p_grid[best]);
            if e < eb || (e == eb && p < pb) {
                best = i;
            }
        }
        Ok(CutSelection {
            p_grid: self.p_grid.clone(),
            loocv_errors,
            chosen_p: self.p_grid[best],
            chosen_partition: self.partitions[self.slot[best]].clone(),
        })
    }
}

/// Dendrogram of the training features under `1 − |r|`.
pub fn variable_dendrogram(train: &Dataset, corr: CorrelationMethod) -> Result<Dendrogram> {
    let c = correlation_dissimilarity(train.features().view(), corr)?;
    average_linkage(c.matrix.view())
}

/// Chooses the cut fraction `p` minimizing the leave-one-out error of a
/// block-based `method`. Ties go to the smallest `p`.
pub fn select_p_by_loocv(
    train: &Dataset,
    spec: DissimilaritySpec,
    method: Method,
    p_grid: &[f64],
    corr: CorrelationMethod,
    k: usize,
) -> Result<CutSelection> {
    let dendrogram = variable_dendrogram(train, corr)?;
    select_p_with_dendrogram(train, spec, method, &dendrogram, p_grid, k)
}

/// [`select_p_by_loocv`] with a precomputed dendrogram.
pub fn select_p_with_dendrogram(
    train: &Dataset,
    spec: DissimilaritySpec,
    method: Method,
    dendrogram: &Dendrogram,
    p_grid: &[f64],
    k: usize,
) -> Result<CutSelection> {
    if !method.uses_partition() {
        return Err(Error::Config(format!("{method} does not use a block partition")));
    }
    if dendrogram.leaf_count != train.dim() {
        return Err(Error::Shape {
            expected: train.dim(),
            found: dendrogram.leaf_count,
        });
    }
    let spec = method.resolve_spec(spec);
    let candidates = CutCandidates::new(dendrogram, p_grid)?;
    candidates.select(train.labels(), train.num_classes(), method, k, |s| {
        Ok(gram::pairwise_dissimilarities(
            spec,
            &candidates.partitions()[s],
            train.features().view(),
        ))
    })
}
