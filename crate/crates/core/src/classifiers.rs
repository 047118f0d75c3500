//! Average-distance and nearest-neighbor classifiers over a fitted sample.
//!
//! Every method here is a decision rule on the matrix of dissimilarities
//! among training points plus one row of dissimilarities from the query to
//! each training point. [`GeometryModel`] holds that matrix and implements the
//! rules; [`FittedModel`] adds the feature-space side (computing rows for new
//! points under a given (γ, φ) and block partition).
//!
//! Ties: class argmins resolve to the smallest class index, neighbor ranks to
//! the smallest training index.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dissimilarity::{BlockPartition, DissimilaritySpec};
use crate::error::{Error, Result};
use crate::exec;
use crate::gram::{self, BlockLayout};

/// The two classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    AvgFamily,
    NnFamily,
}

/// Classifier variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "avg")]
    Avg,
    #[serde(rename = "savg")]
    Savg,
    #[serde(rename = "gsavg")]
    Gsavg,
    #[serde(rename = "ggsavg")]
    Ggsavg,
    #[serde(rename = "nn")]
    Nn,
    #[serde(rename = "nn-madd")]
    NnMadd,
    #[serde(rename = "nn-gmadd")]
    NnGmadd,
    #[serde(rename = "nn-ggmadd")]
    NnGgmadd,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Avg,
        Method::Savg,
        Method::Gsavg,
        Method::Ggsavg,
        Method::Nn,
        Method::NnMadd,
        Method::NnGmadd,
        Method::NnGgmadd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Avg => "avg",
            Method::Savg => "savg",
            Method::Gsavg => "gsavg",
            Method::Ggsavg => "ggsavg",
            Method::Nn => "nn",
            Method::NnMadd => "nn-madd",
            Method::NnGmadd => "nn-gmadd",
            Method::NnGgmadd => "nn-ggmadd",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Method::Avg | Method::Savg | Method::Gsavg | Method::Ggsavg => Family::AvgFamily,
            _ => Family::NnFamily,
        }
    }

    /// Whether the method reads the block partition (otherwise singletons are used).
    pub fn uses_partition(self) -> bool {
        matches!(self, Method::Ggsavg | Method::NnGgmadd)
    }

    /// Whether the method reads the caller's (γ, φ); baselines have a fixed one.
    pub fn uses_spec(self) -> bool {
        matches!(
            self,
            Method::Gsavg | Method::Ggsavg | Method::NnGmadd | Method::NnGgmadd
        )
    }

    /// The dissimilarity the method actually evaluates.
    pub fn resolve_spec(self, spec: DissimilaritySpec) -> DissimilaritySpec {
        match self {
            Method::Avg | Method::Savg | Method::Nn => DissimilaritySpec::SQUARED_EUCLIDEAN,
            Method::NnMadd => DissimilaritySpec::EUCLIDEAN,
            _ => spec,
        }
    }

    /// AVG uses the raw class mean; the others subtract half the within-class spread.
    pub fn is_scale_adjusted(self) -> bool {
        matches!(self, Method::Savg | Method::Gsavg | Method::Ggsavg)
    }

    pub fn is_madd(self) -> bool {
        matches!(self, Method::NnMadd | Method::NnGmadd | Method::NnGgmadd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method '{s}' (expected avg, savg, gsavg, ggsavg, nn, nn-madd, nn-gmadd, nn-ggmadd)"
                ))
            })
    }
}

/// Minimum class size a method needs on its training sample.
pub fn min_class_size(method: Method, k: usize) -> usize {
    match method.family() {
        Family::AvgFamily if method.is_scale_adjusted() => 2,
        Family::AvgFamily => 1,
        Family::NnFamily => k.max(1),
    }
}

/// Decision rules over a precomputed training dissimilarity matrix.
#[derive(Debug, Clone)]
pub struct GeometryModel {
    gram: Array2<f64>,
    labels: Vec<usize>,
    members: Vec<Vec<usize>>,
    within: Vec<f64>,
    method: Method,
    k: usize,
}

impl GeometryModel {
    /// `gram[i][j] = h(X_i, X_j)` for the method's resolved dissimilarity.
    pub fn new(
        gram: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        method: Method,
        k: usize,
    ) -> Result<Self> {
        let n = labels.len();
        if gram.dim() != (n, n) {
            return Err(Error::Shape {
                expected: n,
                found: gram.nrows(),
            });
        }
        let mut members = vec![Vec::new(); num_classes];
        for (i, &l) in labels.iter().enumerate() {
            if l >= num_classes {
                return Err(Error::Config(format!("label {l} outside 0..{num_classes}")));
            }
            members[l].push(i);
        }
        if method.family() == Family::NnFamily {
            if k == 0 {
                return Err(Error::Config("k must be at least 1".into()));
            }
            if method.is_madd() && n < 2 {
                return Err(Error::InsufficientSample {
                    class: 0,
                    needed: 2,
                    found: n,
                });
            }
        }
        let needed = min_class_size(method, k);
        for (j, m) in members.iter().enumerate() {
            if m.len() < needed {
                return Err(Error::InsufficientSample {
                    class: j,
                    needed,
                    found: m.len(),
                });
            }
        }
        let within = members
            .iter()
            .map(|m| within_mean(&gram, m).unwrap_or(f64::NAN))
            .collect();
        Ok(GeometryModel {
            gram,
            labels,
            members,
            within,
            method,
            k,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.members.len()
    }

    pub fn gram(&self) -> &Array2<f64> {
        &self.gram
    }

    /// `D(X_j | X_j)`: mean dissimilarity over ordered distinct pairs of class `j`.
    pub fn within_class_average(&self, class_j: usize) -> Result<f64> {
        let m = self
            .members
            .get(class_j)
            .ok_or_else(|| Error::Config(format!("class {class_j} does not exist")))?;
        within_mean(&self.gram, m).ok_or(Error::InsufficientSample {
            class: class_j,
            needed: 2,
            found: m.len(),
        })
    }

    /// Discriminant of every class for the query row (AVG: class mean; others: ξ).
    pub fn avg_discriminants(&self, row: &[f64]) -> Vec<f64> {
        let adjusted = self.method.is_scale_adjusted();
        self.members
            .iter()
            .zip(&self.within)
            .map(|(m, &w)| {
                let mean = m.iter().map(|&i| row[i]).sum::<f64>() / m.len() as f64;
                if adjusted {
                    mean - 0.5 * w
                } else {
                    mean
                }
            })
            .collect()
    }

    /// `ψ(Z, X_i) = (n−1)⁻¹ Σ_{i'≠i} |h(Z, X_i') − h(X_i, X_i')|`.
    pub fn madd(&self, row: &[f64], i: usize) -> f64 {
        let n = self.labels.len();
        let gi = self.gram.row(i);
        let mut sum = 0.0;
        for (j, (&r, &g)) in row.iter().zip(gi.iter()).enumerate() {
            if j != i {
                sum += (r - g).abs();
            }
        }
        sum / (n - 1) as f64
    }

    /// Per-training-point dissimilarity used by the NN family.
    pub fn neighbor_dissimilarities(&self, row: &[f64]) -> Vec<f64> {
        if self.method.is_madd() {
            (0..self.labels.len()).map(|i| self.madd(row, i)).collect()
        } else {
            row.to_vec()
        }
    }

    /// Predicted class for a query given its dissimilarities to each training point.
    pub fn decide(&self, row: &[f64]) -> usize {
        debug_assert_eq!(row.len(), self.labels.len());
        match self.method.family() {
            Family::AvgFamily => argmin(&self.avg_discriminants(row)),
            Family::NnFamily => {
                let diss = self.neighbor_dissimilarities(row);
                if self.k == 1 {
                    let tau: Vec<f64> = self
                        .members
                        .iter()
                        .map(|m| m.iter().map(|&i| diss[i]).fold(f64::INFINITY, f64::min))
                        .collect();
                    argmin(&tau)
                } else {
                    self.vote(&diss)
                }
            }
        }
    }

    fn vote(&self, diss: &[f64]) -> usize {
        let mut order: Vec<usize> = (0..diss.len()).collect();
        order.sort_by(|&a, &b| diss[a].total_cmp(&diss[b]).then(a.cmp(&b)));
        let nc = self.members.len();
        let mut votes = vec![0usize; nc];
        let mut mass = vec![0.0f64; nc];
        for &i in order.iter().take(self.k) {
            votes[self.labels[i]] += 1;
            mass[self.labels[i]] += diss[i];
        }
        let mut best = 0;
        for j in 1..nc {
            let better = votes[j] > votes[best] || (votes[j] == votes[best] && mass[j] < mass[best]);
            if better {
                best = j;
            }
        }
        best
    }

    /// Decides every row of a query-by-train dissimilarity matrix.
    pub fn decide_all(&self, rows: ArrayView2<'_, f64>) -> Vec<usize> {
        exec::map_indexed(rows.nrows(), |q| {
            let r = rows.row(q);
            match r.as_slice() {
                Some(s) => self.decide(s),
                None => self.decide(&r.to_vec()),
            }
        })
    }

    /// The model trained on every point except `i`, and the held-out query row.
    pub fn without(&self, i: usize) -> Result<(GeometryModel, Vec<f64>, usize)> {
        let n = self.labels.len();
        let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let gram = self.gram.select(ndarray::Axis(0), &keep).select(ndarray::Axis(1), &keep);
        let labels = keep.iter().map(|&j| self.labels[j]).collect();
        let row = keep.iter().map(|&j| self.gram[[i, j]]).collect();
        let model = GeometryModel::new(gram, labels, self.members.len(), self.method, self.k)?;
        Ok((model, row, self.labels[i]))
    }

    /// Leave-one-out misclassification fraction on the training sample.
    pub fn leave_one_out_error(&self) -> Result<f64> {
        let n = self.labels.len();
        self.check_leave_one_out()?;
        let wrong = exec::map_indexed(n, |i| {
            let (model, row, truth) = self.without(i).expect("sizes checked");
            usize::from(model.decide(&row) != truth)
        });
        Ok(wrong.iter().sum::<usize>() as f64 / n as f64)
    }

    fn check_leave_one_out(&self) -> Result<()> {
        let needed = min_class_size(self.method, self.k) + 1;
        let needed = if self.method.is_madd() { needed.max(2) } else { needed };
        for (j, m) in self.members.iter().enumerate() {
            if m.len() < needed {
                return Err(Error::InsufficientSample {
                    class: j,
                    needed,
                    found: m.len(),
                });
            }
        }
        if self.method.is_madd() && self.labels.len() < 3 {
            return Err(Error::InsufficientSample {
                class: 0,
                needed: 3,
                found: self.labels.len(),
            });
        }
        Ok(())
    }
}

fn within_mean(gram: &Array2<f64>, members: &[usize]) -> Option<f64> {
    let nj = members.len();
    if nj < 2 {
        return None;
    }
    let mut sum = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            sum += gram[[i, j]];
        }
    }
    // Each unordered pair stands for two ordered pairs.
    Some(2.0 * sum / (nj * (nj - 1)) as f64)
}

/// Index of the smallest value; ties go to the smaller index.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = j;
        }
    }
    best
}

/// A classifier fitted to a training sample.
#[derive(Debug, Clone)]
pub struct FittedModel {
    train: Dataset,
    spec: DissimilaritySpec,
    partition: BlockPartition,
    layout: BlockLayout,
    arranged: Array2<f64>,
    geometry: GeometryModel,
}

impl FittedModel {
    /// Fits `method`. `spec` is ignored by the fixed-dissimilarity baselines and
    /// `partition` by methods that do not use blocks (they use singletons).
    pub fn fit(
        train: Dataset,
        method: Method,
        spec: DissimilaritySpec,
        partition: Option<BlockPartition>,
        k: usize,
    ) -> Result<Self> {
        let d = train.dim();
        let partition = match partition {
            Some(p) if method.uses_partition() => {
                if p.dim() != d {
                    return Err(Error::Shape {
                        expected: d,
                        found: p.dim(),
                    });
                }
                p
            }
            _ => BlockPartition::singletons(d),
        };
        let spec = method.resolve_spec(spec);
        let layout = BlockLayout::new(&partition);
        let arranged = layout.arrange(train.features().view());
        let gram = gram::apply_phi(
            spec.phi,
            &gram::pairwise_gamma_means(spec.gamma, &layout, arranged.view()),
        );
        let geometry = GeometryModel::new(
            gram,
            train.labels().to_vec(),
            train.num_classes(),
            method,
            k,
        )?;
        Ok(FittedModel {
            train,
            spec,
            partition,
            layout,
            arranged,
            geometry,
        })
    }

    pub fn method(&self) -> Method {
        self.geometry.method
    }

    pub fn family(&self) -> Family {
        self.geometry.method.family()
    }

    /// The dissimilarity actually in use (after resolving baselines).
    pub fn spec(&self) -> DissimilaritySpec {
        self.spec
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn k(&self) -> usize {
        self.geometry.k
    }

    pub fn train(&self) -> &Dataset {
        &self.train
    }

    pub fn geometry(&self) -> &GeometryModel {
        &self.geometry
    }

    fn query_row(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.train.dim() {
            return Err(Error::Shape {
                expected: self.train.dim(),
                found: z.len(),
            });
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("query must have finite entries".into()));
        }
        let z = self.layout.arrange_vec(z);
        Ok(self
            .arranged
            .rows()
            .into_iter()
            .map(|x| {
                let x = x.as_slice().expect("standard layout");
                self.spec.phi.apply(self.layout.gamma_mean(self.spec.gamma, &z, x))
            })
            .collect())
    }

    pub fn within_class_average(&self, class_j: usize) -> Result<f64> {
        self.geometry.within_class_average(class_j)
    }

    /// The average-family discriminant of class `class_j` at `z`.
    pub fn gsavg_discriminant(&self, z: &[f64], class_j: usize) -> Result<f64> {
        if self.family() != Family::AvgFamily {
            return Err(Error::Config(format!(
                "{} is not an average-distance classifier",
                self.method()
            )));
        }
        if class_j >= self.geometry.num_classes() {
            return Err(Error::Config(format!("class {class_j} does not exist")));
        }
        let row = self.query_row(z)?;
        Ok(self.geometry.avg_discriminants(&row)[class_j])
    }

    /// `ψ(z, X_i)` under the model's dissimilarity.
    pub fn madd_dissimilarity(&self, z: &[f64], x_index: usize) -> Result<f64> {
        let n = self.geometry.len();
        if n < 2 {
            return Err(Error::InsufficientSample {
                class: 0,
                needed: 2,
                found: n,
            });
        }
        if x_index >= n {
            return Err(Error::Config(format!("training index {x_index} out of 0..{n}")));
        }
        let row = self.query_row(z)?;
        Ok(self.geometry.madd(&row, x_index))
    }

    pub fn classify(&self, z: &[f64]) -> Result<usize> {
        Ok(self.geometry.decide(&self.query_row(z)?))
    }

    /// Classifies every row of `queries`; identical to calling [`classify`](Self::classify) per row.
    pub fn classify_batch(&self, queries: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        if queries.ncols() != self.train.dim() {
            return Err(Error::Shape {
                expected: self.train.dim(),
                found: queries.ncols(),
            });
        }
        if queries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("queries must have finite entries".into()));
        }
        let q = self.layout.arrange(queries);
        let rows = gram::apply_phi(
            self.spec.phi,
            &gram::cross_gamma_means(self.spec.gamma, &self.layout, q.view(), self.arranged.view()),
        );
        Ok(self.geometry.decide_all(rows.view()))
    }
}
