//! Distance-based classifiers for high-dimension, low-sample-size data.
//!
//! The crate covers the generalized dissimilarity family `h = φ(mean γ(·))`,
//! average-distance and nearest-neighbor classifiers built on it, variable
//! clustering to estimate block structure, simulation models, and an
//! evaluation harness.
//!
//! With the default `parallel` feature, batched kernels and experiment
//! repetitions run on the rayon thread pool. Results do not depend on the
//! number of threads.

pub mod bayes;
pub mod classifiers;
pub mod clustering;
pub mod dataset;
pub mod dissimilarity;
pub mod error;
pub mod exec;
pub mod gram;
pub mod harness;
pub mod loocv;
pub mod population;
pub mod report;
pub mod rng;
pub mod separability;

pub use classifiers::{Family, FittedModel, GeometryModel, Method};
pub use clustering::{average_linkage, correlation_dissimilarity, CorrelationMethod, Dendrogram, Merge};
pub use dataset::Dataset;
pub use dissimilarity::{BlockPartition, DissimilaritySpec, GammaKind, PhiKind};
pub use error::{Error, Result};
pub use harness::{repetition_samples, run_experiment, stratified_split, Blocking, DataSource, EvalReport, ExperimentConfig, ReportCell};
pub use loocv::{select_p_by_loocv, CutSelection};
pub use population::{ExampleId, ExampleSpec};
pub use report::{emit_report, emit_rows, ReportFormat};
