//! `hdlss`: simulate experiments, classify CSV data, cluster variables, and
//! estimate separability constants and Bayes risks.
//!
//! Exit codes: 0 success, 2 usage error, 3 data or I/O error, 4 configuration error.
//! Errors are printed to stderr as one line, `<kind> error: <message>`, with
//! kind one of usage, config, ingest, io, domain, shape or insufficient sample.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hdlss_core::bayes::estimate_bayes_risk;
use hdlss_core::clustering::correlation_dissimilarity;
use hdlss_core::dataset::read_csv_path;
use hdlss_core::loocv::{select_p_with_dendrogram, DEFAULT_P_GRID};
use hdlss_core::report::{emit_report, emit_rows, ReportFormat};
use hdlss_core::separability::estimate_separability;
use hdlss_core::{
    average_linkage, repetition_samples, run_experiment, BlockPartition, Blocking, CorrelationMethod, DataSource,
    Dataset, DissimilaritySpec, Error, EvalReport, ExampleId, ExampleSpec, ExperimentConfig, FittedModel, GammaKind,
    Method, PhiKind,
};

#[derive(Parser)]
#[command(name = "hdlss", version, about = "Distance-based classifiers for high-dimension, low-sample-size data")]
struct Cli {
    /// Worker threads (default: one per core). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated train/test experiments on a simulation model or a CSV file
    Simulate(SimulateArgs),
    /// Fit on a training CSV and predict the rows of a test CSV
    Classify(ClassifyArgs),
    /// Cluster the feature columns of a CSV and cut the dendrogram
    Cluster(ClusterArgs),
    /// Estimate the separability constants of a simulation model
    Constants(ConstantsArgs),
    /// Estimate the Bayes risk of a simulation model
    Bayes(BayesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Corr {
    Pearson,
    Spearman,
}

impl From<Corr> for CorrelationMethod {
    fn from(c: Corr) -> Self {
        match c {
            Corr::Pearson => CorrelationMethod::Pearson,
            Corr::Spearman => CorrelationMethod::SpearmanRank,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation model: 1-5, identical or disjoint
    #[arg(long, conflicts_with_all = ["data", "config"])]
    example: Option<ExampleId>,

    /// Labeled CSV to re-split every repetition instead of simulating
    #[arg(long, conflicts_with = "config")]
    data: Option<PathBuf>,

    /// Per-class training fraction for --data
    #[arg(long, default_value_t = 0.5, requires = "data")]
    train_fraction: f64,

    /// JSON experiment config; replaces all experiment flags
    #[arg(long)]
    config: Option<PathBuf>,

    /// Dimensions to simulate
    #[arg(long = "d", value_delimiter = ',', default_value = "1000")]
    dims: Vec<usize>,

    /// Repetitions
    #[arg(long, default_value_t = 100)]
    reps: usize,

    /// Classifiers
    #[arg(long, value_delimiter = ',', default_value = "avg,savg,gsavg,ggsavg,nn,nn-madd,nn-gmadd,nn-ggmadd")]
    methods: Vec<Method>,

    /// Inner transforms for the generalized classifiers
    #[arg(long, value_delimiter = ',', default_value = "g1,g2,g3")]
    gamma: Vec<GammaKind>,

    /// Outer transforms for the generalized classifiers
    #[arg(long, value_delimiter = ',', default_value = "id")]
    phi: Vec<PhiKind>,

    /// Partition for block methods: singleton, true-blocks, loocv or fixed-size-M
    #[arg(long, default_value = "loocv")]
    blocking: Blocking,

    /// Correlation for estimated blocks (default: spearman for example 4, else pearson)
    #[arg(long)]
    corr: Option<Corr>,

    /// Training points per class (default: 50,50; 50,25 for example 4)
    #[arg(long, value_delimiter = ',')]
    train_per_class: Option<Vec<usize>>,

    /// Test points per class
    #[arg(long, default_value_t = 250)]
    test_per_class: usize,

    /// Neighbors for the nearest-neighbor classifiers
    #[arg(long, default_value_t = 1)]
    k: usize,

    /// Base seed
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Also write every repetition's samples as dD_repR_{train,test}.csv into this directory
    #[arg(long)]
    export: Option<PathBuf>,

    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Labeled training CSV
    #[arg(long)]
    train: PathBuf,

    /// Test CSV (the label column is optional)
    #[arg(long)]
    test: PathBuf,

    /// Classifier
    #[arg(long)]
    method: Method,

    #[arg(long, default_value = "g1")]
    gamma: GammaKind,

    #[arg(long, default_value = "id")]
    phi: PhiKind,

    /// Partition for block methods: singleton, loocv or fixed-size-M
    #[arg(long, default_value = "loocv")]
    blocking: Blocking,

    /// Cut the dendrogram at this fraction instead of choosing it by leave-one-out
    #[arg(long)]
    p: Option<f64>,

    #[arg(long, value_enum, default_value_t = Corr::Pearson)]
    corr: Corr,

    #[arg(long, default_value_t = 1)]
    k: usize,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ClusterArgs {
    /// Training CSV
    #[arg(long)]
    train: PathBuf,

    /// Cut fraction
    #[arg(long, conflicts_with = "method")]
    p: Option<f64>,

    #[arg(long, value_enum, default_value_t = Corr::Pearson)]
    corr: Corr,

    /// Choose the cut by leave-one-out error of this block method (needs labels)
    #[arg(long)]
    method: Option<Method>,

    #[arg(long, default_value = "g1")]
    gamma: GammaKind,

    #[arg(long, default_value = "id")]
    phi: PhiKind,

    #[arg(long, default_value_t = 1)]
    k: usize,

    /// json: dendrogram, partition and curve; csv: merge table
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long)]
    example: ExampleId,

    #[arg(long = "d", default_value_t = 100)]
    d: usize,

    #[arg(long, default_value = "g1")]
    gamma: GammaKind,

    #[arg(long, default_value = "id")]
    phi: PhiKind,

    /// Partition: singleton, true-blocks or fixed-size-M
    #[arg(long, default_value = "true-blocks")]
    blocking: Blocking,

    /// Training size of class 1 (default: the model's standard size)
    #[arg(long)]
    n1: Option<usize>,

    /// Training size of class 2 (default: the model's standard size)
    #[arg(long)]
    n2: Option<usize>,

    #[arg(long, default_value_t = 100_000)]
    mc_size: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BayesArgs {
    #[arg(long)]
    example: ExampleId,

    #[arg(long = "d", value_delimiter = ',', default_value = "1000")]
    dims: Vec<usize>,

    #[arg(long, default_value_t = 100_000)]
    mc_size: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(flatten)]
    output: Output,
}

fn write_output(out: &Output, bytes: &[u8]) -> Result<(), Error> {
    match &out.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(Error::from)
        }
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read(path).map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn simulate(a: SimulateArgs) -> Result<(), Error> {
    let config = if let Some(path) = &a.config {
        read_config(path)?
    } else {
        let source = match (&a.example, &a.data) {
            (Some(id), None) => DataSource::Example(*id),
            (None, Some(path)) => DataSource::Csv {
                path: path.display().to_string(),
                train_fraction: a.train_fraction,
            },
            _ => return Err(Error::Config("give one of --example, --data or --config".into())),
        };
        let specs = a
            .gamma
            .iter()
            .flat_map(|&g| a.phi.iter().map(move |&p| DissimilaritySpec::new(g, p)))
            .collect();
        ExperimentConfig {
            source,
            dims: a.dims,
            train_per_class: a.train_per_class,
            test_per_class: a.test_per_class,
            repetitions: a.reps,
            classifiers: a.methods,
            specs,
            blocking: a.blocking,
            corr: a.corr.map(Into::into),
            p_grid: DEFAULT_P_GRID.to_vec(),
            k: a.k,
            base_seed: a.seed,
        }
    };
    let report = run_experiment(&config)?;
    if let Some(dir) = &a.export {
        export_samples(&config, &report, dir)?;
    }
    write_output(&a.output, &emit_report(&report, a.format.into())?)
}

fn export_samples(config: &ExperimentConfig, report: &EvalReport, dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut dims: Vec<usize> = report.cells.iter().map(|c| c.d).collect();
    dims.dedup();
    for d in dims {
        for rep in 0..config.repetitions {
            let (train, test) = repetition_samples(config, d, rep)?;
            for (role, data) in [("train", train), ("test", test)] {
                let path = dir.join(format!("d{d}_rep{rep}_{role}.csv"));
                std::fs::write(&path, data.to_csv()?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Prediction {
    label: i64,
}

#[derive(Serialize)]
struct Predictions {
    method: Method,
    gamma: GammaKind,
    phi: PhiKind,
    blocks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    chosen_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_rate: Option<f64>,
    predictions: Vec<i64>,
}

fn classify(a: ClassifyArgs) -> Result<(), Error> {
    let train_table = read_csv_path(&a.train)?;
    let names = train_table.feature_names.clone();
    let train = train_table.into_dataset()?;
    let test = read_csv_path(&a.test)?;
    if test.feature_names != names {
        return Err(Error::Ingest(format!(
            "test columns {:?} do not match training columns {:?}",
            test.feature_names, names
        )));
    }
    let spec = DissimilaritySpec::new(a.gamma, a.phi);
    let d = train.dim();
    let corr: CorrelationMethod = a.corr.into();
    let (partition, chosen_p) = if !a.method.uses_partition() {
        if a.p.is_some() {
            return Err(Error::Config(format!("--p applies only to block methods, not {}", a.method)));
        }
        (None, None)
    } else if let Some(p) = a.p {
        let dend = average_linkage(correlation_dissimilarity(train.features().view(), corr)?.matrix.view())?;
        (Some(dend.cut_at_percentile(p)?), Some(p))
    } else {
        match a.blocking {
            Blocking::Singleton => (Some(BlockPartition::singletons(d)), None),
            Blocking::FixedSize(m) => (Some(BlockPartition::contiguous(d, m)?), None),
            Blocking::EstimatedLoocv => {
                let dend = average_linkage(correlation_dissimilarity(train.features().view(), corr)?.matrix.view())?;
                let sel = select_p_with_dendrogram(&train, spec, a.method, &dend, &DEFAULT_P_GRID, a.k)?;
                (Some(sel.chosen_partition), Some(sel.chosen_p))
            }
            Blocking::TrueBlocks => {
                return Err(Error::Config("true-blocks needs a simulation model; use loocv or fixed-size-M".into()))
            }
        }
    };
    let codes = train.class_codes().to_vec();
    let model = FittedModel::fit(train, a.method, spec, partition, a.k)?;
    let predicted: Vec<i64> = model
        .classify_batch(test.features.view())?
        .into_iter()
        .map(|c| codes[c])
        .collect();
    let bytes = match a.format {
        Format::Csv => {
            let rows: Vec<Prediction> = predicted.iter().map(|&label| Prediction { label }).collect();
            emit_rows(&rows, ReportFormat::Csv)?
        }
        Format::Json => {
            let error_rate = test.labels.as_ref().map(|truth| {
                let wrong = truth.iter().zip(&predicted).filter(|(t, p)| t != p).count();
                wrong as f64 / truth.len() as f64
            });
            let spec = model.spec();
            let out = Predictions {
                method: a.method,
                gamma: spec.gamma,
                phi: spec.phi,
                blocks: model.partition().num_blocks(),
                chosen_p,
                error_rate,
                predictions: predicted,
            };
            let mut v = serde_json::to_vec_pretty(&out)?;
            v.push(b'\n');
            v
        }
    };
    write_output(&a.output, &bytes)
}

#[derive(Serialize)]
struct ClusterOutput {
    corr: CorrelationMethod,
    feature_names: Vec<String>,
    constant_columns: Vec<usize>,
    dendrogram: hdlss_core::Dendrogram,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loocv: Option<hdlss_core::CutSelection>,
}

fn cluster(a: ClusterArgs) -> Result<(), Error> {
    let table = read_csv_path(&a.train)?;
    let corr: CorrelationMethod = a.corr.into();
    let c = correlation_dissimilarity(table.features.view(), corr)?;
    let dendrogram = average_linkage(c.matrix.view())?;
    if let Format::Csv = a.format {
        return write_output(&a.output, &emit_rows(&dendrogram.merges, ReportFormat::Csv)?);
    }
    let mut out = ClusterOutput {
        corr,
        feature_names: table.feature_names.clone(),
        constant_columns: c.constant_columns,
        dendrogram: dendrogram.clone(),
        p: None,
        height: None,
        partition: None,
        loocv: None,
    };
    if let Some(method) = a.method {
        let train: Dataset = table.into_dataset()?;
        let spec = DissimilaritySpec::new(a.gamma, a.phi);
        let sel = select_p_with_dendrogram(&train, spec, method, &dendrogram, &DEFAULT_P_GRID, a.k)?;
        out.p = Some(sel.chosen_p);
        out.height = Some(dendrogram.percentile_height(sel.chosen_p)?);
        out.partition = Some(sel.chosen_partition.blocks().to_vec());
        out.loocv = Some(sel);
    } else if let Some(p) = a.p {
        out.p = Some(p);
        out.height = Some(dendrogram.percentile_height(p)?);
        out.partition = Some(dendrogram.cut_at_percentile(p)?.blocks().to_vec());
    }
    let mut v = serde_json::to_vec_pretty(&out)?;
    v.push(b'\n');
    write_output(&a.output, &v)
}

#[derive(Serialize)]
struct ConstantsRow {
    example: ExampleId,
    d: usize,
    gamma: GammaKind,
    phi: PhiKind,
    blocks: usize,
    n1: usize,
    n2: usize,
    xi_12: f64,
    tau_12: f64,
    tau_21: f64,
    se_xi_12: f64,
    se_tau_12: f64,
    se_tau_21: f64,
    mc_size: usize,
}

fn constants(a: ConstantsArgs) -> Result<(), Error> {
    let ex = ExampleSpec::new(a.example, a.d)?;
    let partition = match a.blocking {
        Blocking::Singleton => BlockPartition::singletons(a.d),
        Blocking::FixedSize(m) => BlockPartition::contiguous(a.d, m)?,
        Blocking::TrueBlocks => ex
            .true_blocks()
            .ok_or_else(|| Error::Config(format!("example {} has no known block structure", ex.id)))?,
        Blocking::EstimatedLoocv => {
            return Err(Error::Config("constants use a fixed partition: singleton, true-blocks or fixed-size-M".into()))
        }
    };
    let [d1, d2] = ex.default_train_sizes();
    let (n1, n2) = (a.n1.unwrap_or(d1), a.n2.unwrap_or(d2));
    let spec = DissimilaritySpec::new(a.gamma, a.phi);
    let e = estimate_separability(&ex, spec, &partition, n1, n2, a.mc_size, a.seed)?;
    let row = ConstantsRow {
        example: a.example,
        d: a.d,
        gamma: a.gamma,
        phi: a.phi,
        blocks: partition.num_blocks(),
        n1,
        n2,
        xi_12: e.xi_12,
        tau_12: e.tau_12,
        tau_21: e.tau_21,
        se_xi_12: e.std_errors.xi_12,
        se_tau_12: e.std_errors.tau_12,
        se_tau_21: e.std_errors.tau_21,
        mc_size: e.mc_size,
    };
    write_output(&a.output, &emit_rows(&[row], a.format.into())?)
}

#[derive(Serialize)]
struct BayesRow {
    example: ExampleId,
    d: usize,
    risk: f64,
    std_error: f64,
    mc_size: usize,
}

fn bayes(a: BayesArgs) -> Result<(), Error> {
    let mut rows = Vec::new();
    for &d in &a.dims {
        let ex = ExampleSpec::new(a.example, d)?;
        let e = estimate_bayes_risk(&ex, a.mc_size, a.seed)?;
        rows.push(BayesRow {
            example: a.example,
            d,
            risk: e.risk,
            std_error: e.std_error,
            mc_size: e.mc_size,
        });
    }
    write_output(&a.output, &emit_rows(&rows, a.format.into())?)
}

fn set_threads(threads: Option<usize>) -> Result<(), Error> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    set_threads(cli.threads)?;
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Classify(a) => classify(a),
        Command::Cluster(a) => cluster(a),
        Command::Constants(a) => constants(a),
        Command::Bayes(a) => bayes(a),
    }
}

fn failure(message: &str, code: u8) -> ExitCode {
    eprintln!("{}", message.split_whitespace().collect::<Vec<_>>().join(" "));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return failure(&format!("usage error: {}", first.trim_start_matches("error: ")), 2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ Error::Config(_)) => failure(&err.to_string(), 4),
        Err(err) => failure(&err.to_string(), 3),
    }
}
