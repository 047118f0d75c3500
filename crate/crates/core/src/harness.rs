//! Repeated train/test experiments and their aggregate error rates.
//!
//! Every repetition draws its samples from its own random substreams, and
//! nothing inside a repetition is random, so a report depends only on the
//! configuration. Repetitions run in parallel under the `parallel` feature.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classifiers::{min_class_size, GeometryModel, Method};
use crate::clustering::{CorrelationMethod, Dendrogram};
use crate::dataset::Dataset;
use crate::dissimilarity::{BlockPartition, DissimilaritySpec, GammaKind};
use crate::error::{Error, Result};
use crate::exec;
use crate::gram::{self, BlockLayout};
use crate::loocv::{variable_dendrogram, CutCandidates, DEFAULT_P_GRID};
use crate::population::{ExampleId, ExampleSpec};
use crate::rng;

const DATA_DOMAIN: u64 = 0x64617461;
const SPLIT_DOMAIN: u64 = 0x73706c6974;
const ROLE_SPLIT: u64 = 4;

/// Where samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    /// A simulation model, regenerated at every dimension in `dims`.
    Example(ExampleId),
    /// A labeled CSV file, re-split per repetition.
    Csv { path: String, train_fraction: f64 },
}

/// How block-based methods obtain their variable partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Blocking {
    Singleton,
    TrueBlocks,
    #[serde(rename = "loocv")]
    EstimatedLoocv,
    FixedSize(usize),
}

impl fmt::Display for Blocking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Blocking::Singleton => f.write_str("singleton"),
            Blocking::TrueBlocks => f.write_str("true-blocks"),
            Blocking::EstimatedLoocv => f.write_str("loocv"),
            Blocking::FixedSize(m) => write!(f, "fixed-size-{m}"),
        }
    }
}

impl FromStr for Blocking {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singleton" => Ok(Blocking::Singleton),
            "true-blocks" | "true" => Ok(Blocking::TrueBlocks),
            "loocv" => Ok(Blocking::EstimatedLoocv),
            other => other
                .strip_prefix("fixed-size-")
                .or_else(|| other.strip_prefix("fixed:"))
                .and_then(|m| m.parse().ok())
                .map(Blocking::FixedSize)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "unknown blocking '{other}' (expected singleton, true-blocks, loocv, fixed-size-M)"
                    ))
                }),
        }
    }
}

fn default_test_per_class() -> usize {
    250
}
fn default_repetitions() -> usize {
    100
}
fn default_blocking() -> Blocking {
    Blocking::EstimatedLoocv
}
fn default_p_grid() -> Vec<f64> {
    DEFAULT_P_GRID.to_vec()
}
fn default_k() -> usize {
    1
}

/// Experiment description; also the JSON config file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: DataSource,
    /// Dimensions to simulate. Ignored for CSV sources.
    #[serde(default)]
    pub dims: Vec<usize>,
    /// Training points per class. Defaults to the model's standard sizes.
    #[serde(default)]
    pub train_per_class: Option<Vec<usize>>,
    #[serde(default = "default_test_per_class")]
    pub test_per_class: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub classifiers: Vec<Method>,
    /// (γ, φ) pairs for the generalized methods; baselines ignore this.
    #[serde(default)]
    pub specs: Vec<DissimilaritySpec>,
    #[serde(default = "default_blocking")]
    pub blocking: Blocking,
    /// Correlation for estimated blocks. Defaults to Spearman for heavy-tailed
    /// models and Pearson otherwise.
    #[serde(default)]
    pub corr: Option<CorrelationMethod>,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub base_seed: u64,
}

impl ExperimentConfig {
    /// A config with the standard defaults for a simulation model.
    pub fn for_example(example: ExampleId, dims: Vec<usize>, classifiers: Vec<Method>, specs: Vec<DissimilaritySpec>) -> Self {
        ExperimentConfig {
            source: DataSource::Example(example),
            dims,
            train_per_class: None,
            test_per_class: default_test_per_class(),
            repetitions: default_repetitions(),
            classifiers,
            specs,
            blocking: default_blocking(),
            corr: None,
            p_grid: default_p_grid(),
            k: default_k(),
            base_seed: 0,
        }
    }

    fn correlation(&self, example: Option<&ExampleSpec>) -> CorrelationMethod {
        self.corr.unwrap_or(match example {
            Some(e) if e.heavy_tailed() => CorrelationMethod::SpearmanRank,
            _ => CorrelationMethod::Pearson,
        })
    }

    fn any_blocked(&self) -> bool {
        self.classifiers.iter().any(|m| m.uses_partition())
    }

    fn train_sizes(&self, example: &ExampleSpec) -> Result<[usize; 2]> {
        match &self.train_per_class {
            None => Ok(example.default_train_sizes()),
            Some(v) if v.len() == 2 => Ok([v[0], v[1]]),
            Some(v) => Err(Error::Config(format!(
                "train_per_class needs 2 entries, got {}",
                v.len()
            ))),
        }
    }

    /// Checks everything that can be checked without data.
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("no classifiers given".into()));
        }
        if self.specs.is_empty() && self.classifiers.iter().any(|m| m.uses_spec()) {
            return Err(Error::Config("generalized classifiers need at least one (gamma, phi) spec".into()));
        }
        if self.test_per_class == 0 {
            return Err(Error::Config("test_per_class must be positive".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.p_grid.is_empty() || self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("p_grid must be non-empty with entries in [0, 1]".into()));
        }
        let loocv = self.blocking == Blocking::EstimatedLoocv;
        let check_sizes = |sizes: &[usize]| -> Result<()> {
            for &m in &self.classifiers {
                let mut needed = min_class_size(m, self.k);
                if loocv && m.uses_partition() {
                    needed += 1;
                    if m.is_madd() {
                        needed = needed.max(2);
                    }
                }
                if let Some(class) = sizes.iter().position(|&n| n < needed) {
                    return Err(Error::Config(format!(
                        "{m} needs at least {needed} training points in class {class}, got {}",
                        sizes[class]
                    )));
                }
            }
            Ok(())
        };
        match &self.source {
            DataSource::Example(id) => {
                if self.dims.is_empty() {
                    return Err(Error::Config("dims must list at least one dimension".into()));
                }
                for &d in &self.dims {
                    let ex = ExampleSpec::new(*id, d)?;
                    let sizes = self.train_sizes(&ex)?;
                    check_sizes(&sizes)?;
                    if self.any_blocked() {
                        self.fixed_partition(&ex)?;
                    }
                }
            }
            DataSource::Csv { train_fraction, .. } => {
                if !(*train_fraction > 0.0 && *train_fraction < 1.0) {
                    return Err(Error::Config(format!(
                        "train_fraction must lie in (0, 1), got {train_fraction}"
                    )));
                }
                if self.blocking == Blocking::TrueBlocks {
                    return Err(Error::Config("true-blocks blocking needs a simulation source".into()));
                }
            }
        }
        Ok(())
    }

    /// The partition for non-estimated blocking (`None` for LOOCV).
    fn fixed_partition(&self, example: &ExampleSpec) -> Result<Option<BlockPartition>> {
        let d = example.d;
        match self.blocking {
            Blocking::Singleton => Ok(Some(BlockPartition::singletons(d))),
            Blocking::FixedSize(m) => BlockPartition::contiguous(d, m).map(Some),
            Blocking::TrueBlocks => example.true_blocks().map(Some).ok_or_else(|| {
                Error::Config(format!("example {} has no known block structure", example.id))
            }),
            Blocking::EstimatedLoocv => Ok(None),
        }
    }
}

/// Aggregate result for one (classifier, spec, d, blocking) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub classifier: Method,
    pub gamma: GammaKind,
    pub phi: crate::dissimilarity::PhiKind,
    pub d: usize,
    pub blocking: String,
    pub mean_rate: f64,
    /// Sample standard deviation of the per-repetition rates.
    pub dispersion: f64,
    /// `dispersion / √reps`.
    pub std_error: f64,
    pub reps: usize,
    pub rates: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_p: Option<Vec<f64>>,
    /// Lowest mean among the cells sharing (classifier, phi, d).
    pub best_gamma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub generator: String,
    pub cells: Vec<ReportCell>,
}

impl EvalReport {
    /// The cells of `classifier` at dimension `d` flagged as best over γ.
    pub fn best(&self, classifier: Method, d: usize) -> Vec<&ReportCell> {
        self.cells
            .iter()
            .filter(|c| c.classifier == classifier && c.d == d && c.best_gamma)
            .collect()
    }
}

/// Splits every class at `fraction`, flooring the training side.
pub fn stratified_split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut r = rng::stream(seed, SPLIT_DOMAIN, 0);
    split_with(data, fraction, &mut r)
}

fn split_with<R: rand::Rng + ?Sized>(data: &Dataset, fraction: f64, rng: &mut R) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (j, mut idx) in data.class_indices().into_iter().enumerate() {
        if idx.len() < 2 {
            return Err(Error::InsufficientSample {
                class: j,
                needed: 2,
                found: idx.len(),
            });
        }
        idx.shuffle(rng);
        let cut = ((fraction * idx.len() as f64 + 1e-9).floor() as usize).clamp(1, idx.len() - 1);
        let (a, b) = idx.split_at(cut);
        train.extend_from_slice(a);
        test.extend_from_slice(b);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.subset(&train)?, data.subset(&test)?))
}

/// One evaluated cell before aggregation.
#[derive(Debug, Clone)]
struct Plan {
    method: Method,
    spec: DissimilaritySpec,
    blocking: Option<Blocking>,
}

fn plans(config: &ExperimentConfig) -> Vec<Plan> {
    let mut out: Vec<Plan> = Vec::new();
    for &method in &config.classifiers {
        let blocking = method.uses_partition().then_some(config.blocking);
        let specs: Vec<DissimilaritySpec> = if method.uses_spec() {
            config.specs.clone()
        } else {
            vec![method.resolve_spec(DissimilaritySpec::SQUARED_EUCLIDEAN)]
        };
        for spec in specs {
            let dup = out.iter().any(|p| p.method == method && p.spec == spec);
            if !dup {
                out.push(Plan { method, spec, blocking });
            }
        }
    }
    out
}

/// Per-repetition cache of arranged samples and γ-mean matrices.
struct RepCache<'a> {
    train: ArrayView2<'a, f64>,
    test: ArrayView2<'a, f64>,
    arranged: HashMap<BlockPartition, (BlockLayout, Array2<f64>, Array2<f64>)>,
    train_means: HashMap<(GammaKind, BlockPartition), Array2<f64>>,
    cross_means: HashMap<(GammaKind, BlockPartition), Array2<f64>>,
}

impl<'a> RepCache<'a> {
    fn new(train: ArrayView2<'a, f64>, test: ArrayView2<'a, f64>) -> Self {
        RepCache {
            train,
            test,
            arranged: HashMap::new(),
            train_means: HashMap::new(),
            cross_means: HashMap::new(),
        }
    }

    fn arranged(&mut self, part: &BlockPartition) -> &(BlockLayout, Array2<f64>, Array2<f64>) {
        let (train, test) = (self.train, self.test);
        self.arranged.entry(part.clone()).or_insert_with(|| {
            let layout = BlockLayout::new(part);
            let a = layout.arrange(train);
            let b = layout.arrange(test);
            (layout, a, b)
        })
    }

    fn train_h(&mut self, spec: DissimilaritySpec, part: &BlockPartition) -> Array2<f64> {
        let key = (spec.gamma, part.clone());
        if !self.train_means.contains_key(&key) {
            let (layout, a, _) = self.arranged(part);
            let m = gram::pairwise_gamma_means(spec.gamma, layout, a.view());
            self.train_means.insert(key.clone(), m);
        }
        gram::apply_phi(spec.phi, &self.train_means[&key])
    }

    fn cross_h(&mut self, spec: DissimilaritySpec, part: &BlockPartition) -> Array2<f64> {
        let key = (spec.gamma, part.clone());
        if !self.cross_means.contains_key(&key) {
            let (layout, a, b) = self.arranged(part);
            let m = gram::cross_gamma_means(spec.gamma, layout, b.view(), a.view());
            self.cross_means.insert(key.clone(), m);
        }
        gram::apply_phi(spec.phi, &self.cross_means[&key])
    }
}

struct Outcome {
    rate: f64,
    chosen_p: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn run_repetition(
    config: &ExperimentConfig,
    plans: &[Plan],
    train: &Dataset,
    test: &Dataset,
    fixed: Option<&BlockPartition>,
    corr: CorrelationMethod,
) -> Result<Vec<Outcome>> {
    let d = train.dim();
    let singletons = BlockPartition::singletons(d);
    let mut cache = RepCache::new(train.features().view(), test.features().view());
    let needs_dendrogram = plans
        .iter()
        .any(|p| p.blocking == Some(Blocking::EstimatedLoocv));
    let candidates = if needs_dendrogram {
        let dend: Dendrogram = variable_dendrogram(train, corr)?;
        Some(CutCandidates::new(&dend, &config.p_grid)?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(plans.len());
    for plan in plans {
        let (partition, chosen_p) = match (plan.blocking, fixed) {
            (None, _) => (singletons.clone(), None),
            (Some(Blocking::EstimatedLoocv), _) => {
                let cands = candidates.as_ref().expect("dendrogram computed");
                let sel = cands.select(train.labels(), train.num_classes(), plan.method, config.k, |s| {
                    Ok(cache.train_h(plan.spec, &cands.partitions()[s]))
                })?;
                (sel.chosen_partition, Some(sel.chosen_p))
            }
            (Some(_), Some(p)) => (p.clone(), None),
            (Some(b), None) => {
                return Err(Error::Config(format!("blocking {b} needs a known partition")));
            }
        };
        let geometry = GeometryModel::new(
            cache.train_h(plan.spec, &partition),
            train.labels().to_vec(),
            train.num_classes(),
            plan.method,
            config.k,
        )?;
        let predictions = geometry.decide_all(cache.cross_h(plan.spec, &partition).view());
        let wrong = predictions
            .iter()
            .zip(test.labels())
            .filter(|(p, t)| p != t)
            .count();
        out.push(Outcome {
            rate: wrong as f64 / test.len() as f64,
            chosen_p,
        });
    }
    Ok(out)
}

fn mean_sd(rates: &[f64]) -> (f64, f64) {
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let sd = if rates.len() > 1 {
        (rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

fn simulate_rep(example: &ExampleSpec, sizes: [usize; 2], test_per_class: usize, seed: u64, rep: usize) -> Result<(Dataset, Dataset)> {
    let domain = DATA_DOMAIN.wrapping_add((example.d as u64) << 16);
    let draw = |class: usize, count: usize, role: u64| {
        let mut r = rng::stream(seed, domain, rng::stream_id(rep as u64, role));
        example.sample(class, count, &mut r)
    };
    let train = Dataset::from_class_blocks(&[draw(0, sizes[0], 0)?, draw(1, sizes[1], 1)?])?;
    let test = Dataset::from_class_blocks(&[draw(0, test_per_class, 2)?, draw(1, test_per_class, 3)?])?;
    Ok((train, test))
}

/// The (train, test) samples of repetition `rep` at dimension `d`, exactly as
/// [`run_experiment`] sees them. For CSV sources `d` is ignored.
pub fn repetition_samples(config: &ExperimentConfig, d: usize, rep: usize) -> Result<(Dataset, Dataset)> {
    config.validate()?;
    match &config.source {
        DataSource::Example(id) => {
            let ex = ExampleSpec::new(*id, d)?;
            simulate_rep(&ex, config.train_sizes(&ex)?, config.test_per_class, config.base_seed, rep)
        }
        DataSource::Csv { path, train_fraction } => {
            let ds = Dataset::from_csv_path(path)?;
            resplit(&ds, *train_fraction, config.base_seed, rep)
        }
    }
}

fn resplit(data: &Dataset, fraction: f64, seed: u64, rep: usize) -> Result<(Dataset, Dataset)> {
    let mut r = rng::stream(seed, SPLIT_DOMAIN, rng::stream_id(rep as u64, ROLE_SPLIT));
    split_with(data, fraction, &mut r)
}

/// Runs every (d, classifier, spec) cell over all repetitions.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let plans = plans(config);
    let mut cells = Vec::new();

    let csv_data = match &config.source {
        DataSource::Csv { path, .. } => Some(Dataset::from_csv_path(path)?),
        DataSource::Example(_) => None,
    };
    let dims: Vec<usize> = match &csv_data {
        Some(ds) => vec![ds.dim()],
        None => config.dims.clone(),
    };

    for &d in &dims {
        let (example, fixed, corr) = match &config.source {
            DataSource::Example(id) => {
                let ex = ExampleSpec::new(*id, d)?;
                let fixed = if config.any_blocked() { config.fixed_partition(&ex)? } else { None };
                (Some(ex), fixed, config.correlation(Some(&ex)))
            }
            DataSource::Csv { .. } => {
                let fixed = match config.blocking {
                    Blocking::Singleton => Some(BlockPartition::singletons(d)),
                    Blocking::FixedSize(m) => Some(BlockPartition::contiguous(d, m)?),
                    _ => None,
                };
                (None, fixed, config.correlation(None))
            }
        };
        let results = exec::map_indexed(config.repetitions, |rep| -> Result<Vec<Outcome>> {
            let (train, test) = match (&example, &config.source, &csv_data) {
                (Some(ex), _, _) => simulate_rep(ex, config.train_sizes(ex)?, config.test_per_class, config.base_seed, rep)?,
                (None, DataSource::Csv { train_fraction, .. }, Some(ds)) => resplit(ds, *train_fraction, config.base_seed, rep)?,
                _ => unreachable!("source and data agree"),
            };
            run_repetition(config, &plans, &train, &test, fixed.as_ref(), corr)
        });
        let results: Vec<Vec<Outcome>> = results.into_iter().collect::<Result<_>>()?;

        let first = cells.len();
        for (ci, plan) in plans.iter().enumerate() {
            let rates: Vec<f64> = results.iter().map(|r| r[ci].rate).collect();
            let chosen_p = (plan.blocking == Some(Blocking::EstimatedLoocv))
                .then(|| results.iter().map(|r| r[ci].chosen_p.expect("set for loocv")).collect());
            let (mean, sd) = mean_sd(&rates);
            cells.push(ReportCell {
                classifier: plan.method,
                gamma: plan.spec.gamma,
                phi: plan.spec.phi,
                d,
                blocking: plan.blocking.unwrap_or(Blocking::Singleton).to_string(),
                mean_rate: mean,
                dispersion: sd,
                std_error: sd / (rates.len() as f64).sqrt(),
                reps: rates.len(),
                rates,
                chosen_p,
                best_gamma: false,
            });
        }
        mark_best_gamma(&mut cells[first..]);
    }
    Ok(EvalReport {
        config: config.clone(),
        generator: rng::GENERATOR.to_string(),
        cells,
    })
}

fn mark_best_gamma(cells: &mut [ReportCell]) {
    for i in 0..cells.len() {
        let best = (0..cells.len())
            .filter(|&j| cells[j].classifier == cells[i].classifier && cells[j].phi == cells[i].phi)
            .min_by(|&a, &b| cells[a].mean_rate.total_cmp(&cells[b].mean_rate).then(a.cmp(&b)))
            .expect("cell i matches itself");
        cells[i].best_gamma = best == i;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissimilarity::PhiKind;
    use ndarray::Array2;

    fn toy(n: [usize; 2]) -> Dataset {
        let rows = n[0] + n[1];
        let x = Array2::from_shape_fn((rows, 2), |(i, j)| (i * 3 + j) as f64);
        let labels = (0..rows).map(|i| usize::from(i >= n[0])).collect();
        Dataset::new(x, labels).unwrap()
    }

    #[test]
    fn split_sizes_floor_train() {
        let (tr, te) = stratified_split(&toy([10, 10]), 0.5, 1).unwrap();
        assert_eq!((tr.class_counts(), te.class_counts()), (vec![5, 5], vec![5, 5]));
        let (tr, te) = stratified_split(&toy([7, 8]), 0.5, 1).unwrap();
        assert_eq!((tr.class_counts(), te.class_counts()), (vec![3, 4], vec![4, 4]));
        assert!(stratified_split(&toy([1, 5]), 0.5, 1).is_err());
    }

    #[test]
    fn split_is_seeded_and_exhaustive() {
        let data = toy([20, 20]);
        let (a, _) = stratified_split(&data, 0.5, 3).unwrap();
        let (b, _) = stratified_split(&data, 0.5, 3).unwrap();
        let (c, _) = stratified_split(&data, 0.5, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let (tr, te) = stratified_split(&data, 0.3, 9).unwrap();
        let mut all: Vec<f64> = tr.features().column(0).iter().chain(te.features().column(0).iter()).cloned().collect();
        all.sort_by(f64::total_cmp);
        let expected: Vec<f64> = data.features().column(0).to_vec();
        assert_eq!(all, expected);
    }

    fn small_config(id: ExampleId) -> ExperimentConfig {
        let mut c = ExperimentConfig::for_example(
            id,
            vec![20],
            vec![Method::Savg, Method::Gsavg, Method::Ggsavg, Method::NnGgmadd],
            vec![
                DissimilaritySpec::new(GammaKind::OneMinusExpNeg, PhiKind::Identity),
                DissimilaritySpec::new(GammaKind::Log1p, PhiKind::Identity),
            ],
        );
        c.repetitions = 3;
        c.test_per_class = 10;
        c.train_per_class = Some(vec![6, 6]);
        c
    }

    #[test]
    fn report_shape_and_best_gamma() {
        let report = run_experiment(&small_config(ExampleId::Ex2)).unwrap();
        // savg once, three generalized methods with two specs
        assert_eq!(report.cells.len(), 7);
        for cell in &report.cells {
            assert_eq!(cell.rates.len(), 3);
            assert!(cell.rates.iter().all(|r| (0.0..=1.0).contains(r)));
            let (m, _) = mean_sd(&cell.rates);
            assert_eq!(cell.mean_rate, m);
            assert_eq!(cell.chosen_p.is_some(), cell.classifier.uses_partition());
        }
        for m in [Method::Savg, Method::Gsavg, Method::Ggsavg, Method::NnGgmadd] {
            assert_eq!(report.best(m, 20).len(), 1, "{m}");
        }
    }

    #[test]
    fn identical_classes_are_coin_flips() {
        let mut c = small_config(ExampleId::Identical);
        c.repetitions = 8;
        c.test_per_class = 50;
        c.blocking = Blocking::Singleton;
        let report = run_experiment(&c).unwrap();
        for cell in &report.cells {
            assert!((cell.mean_rate - 0.5).abs() < 0.1, "{cell:?}");
        }
    }

    #[test]
    fn config_errors() {
        let mut c = small_config(ExampleId::Ex3);
        c.blocking = Blocking::TrueBlocks;
        assert!(matches!(run_experiment(&c), Err(Error::Config(_))));
        let mut c = small_config(ExampleId::Ex2);
        c.dims = vec![25];
        assert!(run_experiment(&c).is_err());
        let mut c = small_config(ExampleId::Ex1);
        c.blocking = Blocking::FixedSize(3);
        assert!(run_experiment(&c).is_err());
        let mut c = small_config(ExampleId::Ex1);
        c.train_per_class = Some(vec![2, 6]);
        let err = run_experiment(&c).unwrap_err().to_string();
        assert!(err.contains("class 0"), "{err}");
        let mut c = small_config(ExampleId::Ex1);
        c.repetitions = 0;
        assert!(run_experiment(&c).is_err());
    }

    #[test]
    fn blocking_names_round_trip() {
        for b in [Blocking::Singleton, Blocking::TrueBlocks, Blocking::EstimatedLoocv, Blocking::FixedSize(10)] {
            assert_eq!(b.to_string().parse::<Blocking>().unwrap(), b);
        }
        let json = serde_json::to_string(&Blocking::FixedSize(5)).unwrap();
        assert_eq!(json, r#"{"fixed-size":5}"#);
        assert_eq!(serde_json::to_string(&Blocking::EstimatedLoocv).unwrap(), r#""loocv""#);
    }
}
