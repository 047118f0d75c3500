//! Variable clustering: correlation dissimilarities between feature columns,
//! average-linkage (UPGMA) dendrograms, and percentile-height cuts.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dissimilarity::BlockPartition;
use crate::error::{Error, Result};
use crate::exec;

/// Correlation coefficient used for the `1 − |r|` dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrelationMethod {
    #[serde(rename = "pearson")]
    Pearson,
    /// Pearson correlation of average ranks; robust to heavy tails.
    #[serde(rename = "spearman")]
    SpearmanRank,
}

impl CorrelationMethod {
    pub fn name(self) -> &'static str {
        match self {
            CorrelationMethod::Pearson => "pearson",
            CorrelationMethod::SpearmanRank => "spearman",
        }
    }
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::SpearmanRank),
            other => Err(Error::Config(format!(
                "unknown correlation '{other}' (expected pearson, spearman)"
            ))),
        }
    }
}

/// `1 − |r(i, i')|` between feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationDissimilarity {
    pub matrix: Array2<f64>,
    /// Columns with zero variance; their correlation with everything is taken as 0.
    pub constant_columns: Vec<usize>,
}

/// Average ranks (1-based) of `values`, ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Computes the `d × d` matrix `1 − |r|` over the columns of `features` (n ≥ 2 rows).
pub fn correlation_dissimilarity(
    features: ArrayView2<'_, f64>,
    method: CorrelationMethod,
) -> Result<CorrelationDissimilarity> {
    let (n, d) = features.dim();
    if n < 2 {
        return Err(Error::InsufficientSample {
            class: 0,
            needed: 2,
            found: n,
        });
    }
    if features.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("features must be finite".into()));
    }
    // Standardized columns stored row-major by column so dot products are contiguous.
    let mut constant_columns = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for c in 0..d {
        let col: Vec<f64> = features.column(c).to_vec();
        let col = match method {
            CorrelationMethod::Pearson => col,
            CorrelationMethod::SpearmanRank => average_ranks(&col),
        };
        let mean = col.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = col.iter().map(|x| x - mean).collect();
        let norm = centered.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = norm.max(mean.abs()) * f64::EPSILON * n as f64;
        if norm <= scale || norm == 0.0 {
            constant_columns.push(c);
            cols.push(vec![0.0; n]);
        } else {
            cols.push(centered.iter().map(|x| x / norm).collect());
        }
    }
    let is_constant: Vec<bool> = {
        let mut v = vec![false; d];
        for &c in &constant_columns {
            v[c] = true;
        }
        v
    };
    let upper: Vec<Vec<f64>> = exec::map_indexed(d, |i| {
        (i + 1..d)
            .map(|j| {
                if is_constant[i] || is_constant[j] {
                    return 1.0;
                }
                let r: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                (1.0 - r.abs()).clamp(0.0, 1.0)
            })
            .collect()
    });
    let mut matrix = Array2::<f64>::zeros((d, d));
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            matrix[[i, i + 1 + off]] = v;
            matrix[[i + 1 + off, i]] = v;
        }
    }
    Ok(CorrelationDissimilarity {
        matrix,
        constant_columns,
    })
}

/// One agglomeration step. Leaves are nodes `0..d`; the cluster created by
/// merge `s` is node `d + s`. `left < right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Merge tree from agglomerative clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaf_count: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    /// Number of merges the `p`-th nearest-rank percentile cut applies:
    /// `ceil(p · (d − 1))`, so `p = 0` applies none.
    pub fn percentile_rank(&self, p: f64) -> Result<usize> {
        check_fraction(p)?;
        let m = self.merges.len();
        // Guard against 0.7 * 10 = 7.000000000000001 style rounding.
        let k = (p * m as f64 - 1e-9).ceil().max(0.0) as usize;
        Ok(k.min(m))
    }

    /// Nearest-rank percentile of the merge heights. `p = 0` and an empty
    /// height set both report 0; use [`cut_at_percentile`](Self::cut_at_percentile)
    /// for the partitions, where `p = 0` always means singletons.
    pub fn percentile_height(&self, p: f64) -> Result<f64> {
        let k = self.percentile_rank(p)?;
        Ok(if k == 0 { 0.0 } else { self.merges[k - 1].height })
    }

    /// Clusters formed by applying every merge with height ≤ `h`.
    pub fn cut_at_height(&self, h: f64) -> BlockPartition {
        let applied = self.merges.iter().take_while(|m| m.height <= h).count();
        self.cut_after(applied)
    }

    /// The partition induced by the `p`-th percentile height.
    pub fn cut_at_percentile(&self, p: f64) -> Result<BlockPartition> {
        let k = self.percentile_rank(p)?;
        if k == 0 {
            return Ok(self.cut_after(0));
        }
        Ok(self.cut_at_height(self.merges[k - 1].height))
    }

    /// Partition after the first `applied` merges, blocks in canonical order.
    pub fn cut_after(&self, applied: usize) -> BlockPartition {
        let d = self.leaf_count;
        let mut uf = UnionFind::new(2 * d);
        for (s, m) in self.merges.iter().take(applied).enumerate() {
            uf.union(m.left, d + s);
            uf.union(m.right, d + s);
        }
        let assignment: Vec<usize> = (0..d).map(|i| uf.find(i)).collect();
        BlockPartition::from_assignment(&assignment)
            .expect("cuts of a dendrogram are partitions")
            .canonical()
    }

    /// Checks merge count, child uniqueness and height monotonicity.
    pub fn validate(&self) -> Result<()> {
        let d = self.leaf_count;
        if self.merges.len() + 1 != d.max(1) {
            return Err(Error::Domain(format!(
                "{} merges for {d} leaves",
                self.merges.len()
            )));
        }
        let mut used = vec![false; 2 * d];
        for (s, m) in self.merges.iter().enumerate() {
            for c in [m.left, m.right] {
                if c >= d + s || std::mem::replace(&mut used[c], true) {
                    return Err(Error::Domain(format!("merge {s} has invalid child {c}")));
                }
            }
            if s > 0 && m.height < self.merges[s - 1].height {
                return Err(Error::Domain(format!("merge {s} decreases the height")));
            }
        }
        Ok(())
    }
}

fn check_fraction(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("percentile fraction must be in [0, 1], got {p}")));
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Ordering key for a candidate merge: distance, then the (smaller, larger) node-id pair.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    lo: usize,
    hi: usize,
}

impl Candidate {
    fn new(dist: f64, a: usize, b: usize) -> Self {
        Candidate {
            dist,
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    fn better_than(&self, other: &Candidate) -> bool {
        match self.dist.total_cmp(&other.dist) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => (self.lo, self.hi) < (other.lo, other.hi),
        }
    }
}

/// Average-linkage agglomerative clustering of a symmetric, zero-diagonal,
/// non-negative dissimilarity matrix.
///
/// The cluster pair with the smallest mean cross dissimilarity is merged
/// first; exact ties go to the lexicographically smallest node-id pair.
pub fn average_linkage(dissim: ArrayView2<'_, f64>) -> Result<Dendrogram> {
    let (d, c) = dissim.dim();
    if d != c {
        return Err(Error::Shape {
            expected: d,
            found: c,
        });
    }
    for i in 0..d {
        if dissim[[i, i]] != 0.0 {
            return Err(Error::Domain(format!("diagonal entry {i} is not zero")));
        }
        for j in 0..d {
            let v = dissim[[i, j]];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("entry ({i}, {j}) is negative or non-finite")));
            }
            if v != dissim[[j, i]] {
                return Err(Error::Domain(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    if d <= 1 {
        return Ok(Dendrogram {
            leaf_count: d,
            merges: Vec::new(),
        });
    }

    // Slot-based state: slot `s` holds an active cluster with node id `node[s]`.
    let mut dist = dissim.as_standard_layout().into_owned();
    let mut active = vec![true; d];
    let mut node: Vec<usize> = (0..d).collect();
    let mut size = vec![1usize; d];
    let mut nearest: Vec<Option<(usize, Candidate)>> = vec![None; d];

    let row_nearest = |dist: &Array2<f64>, active: &[bool], node: &[usize], s: usize| {
        let mut best: Option<(usize, Candidate)> = None;
        for t in 0..active.len() {
            if t == s || !active[t] {
                continue;
            }
            let cand = Candidate::new(dist[[s, t]], node[s], node[t]);
            if best.is_none_or(|(_, b)| cand.better_than(&b)) {
                best = Some((t, cand));
            }
        }
        best
    };

    for s in 0..d {
        nearest[s] = row_nearest(&dist, &active, &node, s);
    }

    let mut merges = Vec::with_capacity(d - 1);
    let mut last_height = 0.0f64;
    for step in 0..d - 1 {
        let mut best: Option<(usize, usize, Candidate)> = None;
        for s in 0..d {
            if !active[s] {
                continue;
            }
            if let Some((t, cand)) = nearest[s] {
                if best.is_none_or(|(_, _, b)| cand.better_than(&b)) {
                    best = Some((s, t, cand));
                }
            }
        }
        let (a, b, cand) = best.expect("at least two active clusters");
        let (keep, gone) = (a.min(b), a.max(b));
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for t in 0..d {
            if !active[t] || t == a || t == b {
                continue;
            }
            let v = (na * dist[[a, t]] + nb * dist[[b, t]]) / (na + nb);
            dist[[keep, t]] = v;
            dist[[t, keep]] = v;
        }
        active[gone] = false;
        size[keep] = size[a] + size[b];
        node[keep] = d + step;
        // Rounding in the weighted mean can dip below the previous height by an ulp.
        let height = cand.dist.max(last_height);
        last_height = height;
        merges.push(Merge {
            left: cand.lo,
            right: cand.hi,
            height,
            size: size[keep],
        });

        nearest[gone] = None;
        nearest[keep] = row_nearest(&dist, &active, &node, keep);
        for t in 0..d {
            if !active[t] || t == keep {
                continue;
            }
            let stale = matches!(nearest[t], Some((u, _)) if u == a || u == b);
            if stale {
                nearest[t] = row_nearest(&dist, &active, &node, t);
            } else {
                let cand = Candidate::new(dist[[t, keep]], node[t], node[keep]);
                if nearest[t].is_none_or(|(_, cur)| cand.better_than(&cur)) {
                    nearest[t] = Some((keep, cand));
                }
            }
        }
    }
    Ok(Dendrogram {
        leaf_count: d,
        merges,
    })
}
