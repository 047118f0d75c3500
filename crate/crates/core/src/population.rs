//! Two-class simulation models.
//!
//! | id        | class 0                               | class 1                                  |
//! |-----------|---------------------------------------|------------------------------------------|
//! | Ex1       | i.i.d. N(0, 5/3)                      | i.i.d. t₅                                |
//! | Ex2       | N_d(0, Σ), 10×10 blocks, ρ = 0.3      | same with ρ = 0.7                        |
//! | Ex3       | N_d(0, Σ), Σ_ij = 0.3^{|i−j|}          | Σ_ij = 0.7^{|i−j|}                        |
//! | Ex4       | i.i.d. Cauchy(0, 1)                   | i.i.d. Cauchy(0.75, 0.75)                |
//! | Ex5       | N(0, diag(I_⌊d/2⌋, 0.5·I))            | N(0, diag(0.5·I_{d−⌊d/2⌋}, I))           |
//! | Identical | i.i.d. N(0, 1)                        | i.i.d. N(0, 1)                           |
//! | Disjoint  | i.i.d. U(0, 1)                        | i.i.d. U(2, 3)                           |
//!
//! The last two are diagnostics with known Bayes risk 0.5 and 0.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::dissimilarity::BlockPartition;
use crate::error::{Error, Result};
use crate::rng;

const EX2_BLOCK: usize = 10;
const EX2_RHO: [f64; 2] = [0.3, 0.7];
const EX3_RHO: [f64; 2] = [0.3, 0.7];
const EX1_VAR: f64 = 5.0 / 3.0;
const EX4_LOC: [f64; 2] = [0.0, 0.75];
const EX4_SCALE: [f64; 2] = [1.0, 0.75];

/// Domain tag for [`ExampleSpec::generate`] streams.
pub const GENERATE_DOMAIN: u64 = 0x67656e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExampleId {
    #[serde(rename = "1")]
    Ex1,
    #[serde(rename = "2")]
    Ex2,
    #[serde(rename = "3")]
    Ex3,
    #[serde(rename = "4")]
    Ex4,
    #[serde(rename = "5")]
    Ex5,
    #[serde(rename = "identical")]
    Identical,
    #[serde(rename = "disjoint")]
    Disjoint,
}

impl ExampleId {
    pub const ALL: [ExampleId; 7] = [
        ExampleId::Ex1,
        ExampleId::Ex2,
        ExampleId::Ex3,
        ExampleId::Ex4,
        ExampleId::Ex5,
        ExampleId::Identical,
        ExampleId::Disjoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::Ex1 => "1",
            ExampleId::Ex2 => "2",
            ExampleId::Ex3 => "3",
            ExampleId::Ex4 => "4",
            ExampleId::Ex5 => "5",
            ExampleId::Identical => "identical",
            ExampleId::Disjoint => "disjoint",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.strip_prefix("ex").unwrap_or(s);
        ExampleId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown example '{s}' (expected 1, 2, 3, 4, 5, identical, disjoint)"
                ))
            })
    }
}

/// A simulation model at a fixed dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExampleSpec {
    pub id: ExampleId,
    pub d: usize,
}

impl ExampleSpec {
    pub fn new(id: ExampleId, d: usize) -> Result<Self> {
        let spec = ExampleSpec { id, d };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if self.id == ExampleId::Ex2 && self.d % EX2_BLOCK != 0 {
            return Err(Error::Config(format!(
                "example 2 needs d divisible by {EX2_BLOCK}, got {}",
                self.d
            )));
        }
        Ok(())
    }

    /// Standard training sizes for the model.
    pub fn default_train_sizes(&self) -> [usize; 2] {
        match self.id {
            ExampleId::Ex4 => [50, 25],
            _ => [50, 50],
        }
    }

    /// The known variable grouping, where the model has one.
    pub fn true_blocks(&self) -> Option<BlockPartition> {
        match self.id {
            ExampleId::Ex2 => BlockPartition::contiguous(self.d, EX2_BLOCK).ok(),
            ExampleId::Ex3 => None,
            _ => Some(BlockPartition::singletons(self.d)),
        }
    }

    /// Whether moments fail to exist, so rank correlation should be used for clustering.
    pub fn heavy_tailed(&self) -> bool {
        self.id == ExampleId::Ex4
    }

    /// Diagonal of the class covariance, when second moments exist.
    pub fn covariance_diagonal(&self, class: usize) -> Option<Vec<f64>> {
        let d = self.d;
        match self.id {
            ExampleId::Ex1 => Some(vec![EX1_VAR; d]),
            ExampleId::Ex2 | ExampleId::Ex3 | ExampleId::Identical => Some(vec![1.0; d]),
            ExampleId::Ex5 => Some((0..d).map(|i| ex5_variance(d, class, i)).collect()),
            ExampleId::Disjoint => Some(vec![1.0 / 12.0; d]),
            ExampleId::Ex4 => None,
        }
    }

    fn check_class(&self, class: usize) -> Result<()> {
        self.validate()?;
        if class > 1 {
            return Err(Error::Config(format!("models have classes 0 and 1, got {class}")));
        }
        Ok(())
    }

    /// `count` i.i.d. rows from class `class`, reproducible from `seed`.
    pub fn generate(&self, class: usize, count: usize, seed: u64) -> Result<Array2<f64>> {
        let mut r = rng::stream(seed, GENERATE_DOMAIN, class as u64);
        self.sample(class, count, &mut r)
    }

    /// `count` i.i.d. rows drawn from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, class: usize, count: usize, rng: &mut R) -> Result<Array2<f64>> {
        self.check_class(class)?;
        let d = self.d;
        let mut out = Array2::<f64>::zeros((count, d));
        for mut row in out.rows_mut() {
            let x = row.as_slice_mut().expect("standard layout");
            self.fill_row(class, x, rng);
        }
        Ok(out)
    }

    fn fill_row<R: Rng + ?Sized>(&self, class: usize, x: &mut [f64], rng: &mut R) {
        let normal = |rng: &mut R| -> f64 { rng.sample(StandardNormal) };
        match self.id {
            ExampleId::Ex1 => {
                if class == 0 {
                    let sd = EX1_VAR.sqrt();
                    x.iter_mut().for_each(|v| *v = sd * normal(rng));
                } else {
                    let t = StudentT::new(5.0).expect("valid degrees of freedom");
                    x.iter_mut().for_each(|v| *v = t.sample(rng));
                }
            }
            ExampleId::Ex2 => {
                // One-factor form of the compound-symmetry block.
                let rho = EX2_RHO[class];
                let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
                for block in x.chunks_mut(EX2_BLOCK) {
                    let w = normal(rng);
                    block.iter_mut().for_each(|v| *v = a * w + b * normal(rng));
                }
            }
            ExampleId::Ex3 => {
                // AR(1) recursion, i.e. the exact Cholesky factor of ρ^{|i−j|}.
                let rho = EX3_RHO[class];
                let innov = (1.0 - rho * rho).sqrt();
                let mut prev = normal(rng);
                x[0] = prev;
                for v in x.iter_mut().skip(1) {
                    prev = rho * prev + innov * normal(rng);
                    *v = prev;
                }
            }
            ExampleId::Ex4 => {
                let c = Cauchy::new(EX4_LOC[class], EX4_SCALE[class]).expect("positive scale");
                x.iter_mut().for_each(|v| *v = c.sample(rng));
            }
            ExampleId::Ex5 => {
                let d = self.d;
                for (i, v) in x.iter_mut().enumerate() {
                    *v = ex5_variance(d, class, i).sqrt() * normal(rng);
                }
            }
            ExampleId::Identical => x.iter_mut().for_each(|v| *v = normal(rng)),
            ExampleId::Disjoint => {
                let lo = 2.0 * class as f64;
                x.iter_mut().for_each(|v| *v = lo + rng.random::<f64>());
            }
        }
    }

    /// Log density of class `class` at `x` (may be `-inf` outside the support).
    pub fn log_density(&self, class: usize, x: &[f64]) -> Result<f64> {
        self.check_class(class)?;
        if x.len() != self.d {
            return Err(Error::Shape {
                expected: self.d,
                found: x.len(),
            });
        }
        Ok(match self.id {
            ExampleId::Ex1 => {
                if class == 0 {
                    x.iter().map(|&v| normal_logpdf(v, EX1_VAR)).sum()
                } else {
                    x.iter().map(|&v| t5_logpdf(v)).sum()
                }
            }
            ExampleId::Ex2 => x
                .chunks(EX2_BLOCK)
                .map(|b| compound_symmetry_logpdf(b, EX2_RHO[class]))
                .sum(),
            ExampleId::Ex3 => {
                let rho = EX3_RHO[class];
                let var = 1.0 - rho * rho;
                normal_logpdf(x[0], 1.0)
                    + x.windows(2).map(|w| normal_logpdf(w[1] - rho * w[0], var)).sum::<f64>()
            }
            ExampleId::Ex4 => x
                .iter()
                .map(|&v| cauchy_logpdf(v, EX4_LOC[class], EX4_SCALE[class]))
                .sum(),
            ExampleId::Ex5 => x
                .iter()
                .enumerate()
                .map(|(i, &v)| normal_logpdf(v, ex5_variance(self.d, class, i)))
                .sum(),
            ExampleId::Identical => x.iter().map(|&v| normal_logpdf(v, 1.0)).sum(),
            ExampleId::Disjoint => {
                let lo = 2.0 * class as f64;
                if x.iter().all(|&v| (lo..=lo + 1.0).contains(&v)) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        })
    }
}

fn ex5_variance(d: usize, class: usize, i: usize) -> f64 {
    let half = d / 2;
    let unit = if class == 0 { i < half } else { i >= d - half };
    if unit {
        1.0
    } else {
        0.5
    }
}

fn normal_logpdf(x: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * PI * var).ln() + x * x / var)
}

fn t5_logpdf(x: f64) -> f64 {
    // Γ(3) / (√(5π) Γ(5/2)) with Γ(5/2) = 3√π/4
    let norm = 2.0f64.ln() - 0.5 * (5.0 * PI).ln() - (0.75 * PI.sqrt()).ln();
    norm - 3.0 * (x * x / 5.0).ln_1p()
}

fn cauchy_logpdf(x: f64, loc: f64, scale: f64) -> f64 {
    let z = (x - loc) / scale;
    -(PI * scale).ln() - (z * z).ln_1p()
}

/// Log density of N_m(0, (1−ρ)I + ρ11ᵀ).
fn compound_symmetry_logpdf(x: &[f64], rho: f64) -> f64 {
    let m = x.len() as f64;
    let big = 1.0 + (m - 1.0) * rho;
    let ss: f64 = x.iter().map(|v| v * v).sum();
    let s: f64 = x.iter().sum();
    let quad = (ss - rho / big * s * s) / (1.0 - rho);
    let logdet = (m - 1.0) * (1.0 - rho).ln() + big.ln();
    -0.5 * (m * (2.0 * PI).ln() + logdet + quad)
}
