//! The generalized dissimilarity family `h = φ(mean γ(·))`.
//!
//! Two flavours are provided: the componentwise form averages `γ(|u_i - v_i|²)`
//! over coordinates, and the blocked form averages `γ(‖u_C - v_C‖² / |C|)` over
//! the blocks `C` of a [`BlockPartition`]. With the singleton partition the two
//! coincide bit for bit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The inner transform γ applied to (block-averaged) squared differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GammaKind {
    /// γ(t) = t
    #[serde(rename = "id")]
    Identity,
    /// γ₁(t) = 1 − e^{−t}
    #[serde(rename = "g1")]
    OneMinusExpNeg,
    /// γ₂(t) = √t / 2
    #[serde(rename = "g2")]
    HalfSqrt,
    /// γ₃(t) = log(1 + t)
    #[serde(rename = "g3")]
    Log1p,
}

impl GammaKind {
    pub const ALL: [GammaKind; 4] = [
        GammaKind::Identity,
        GammaKind::OneMinusExpNeg,
        GammaKind::HalfSqrt,
        GammaKind::Log1p,
    ];

    /// The three bounded-derivative choices used by the generalized classifiers.
    pub const GENERALIZED: [GammaKind; 3] = [
        GammaKind::OneMinusExpNeg,
        GammaKind::HalfSqrt,
        GammaKind::Log1p,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GammaKind::Identity => "id",
            GammaKind::OneMinusExpNeg => "g1",
            GammaKind::HalfSqrt => "g2",
            GammaKind::Log1p => "g3",
        }
    }

    /// Evaluates γ without checking the domain. Hot loops call this directly.
    #[inline(always)]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            GammaKind::Identity => t,
            // exp_m1 only where 1 − e^{−t} would cancel; it is about twice as slow
            GammaKind::OneMinusExpNeg if t < 0.25 => -(-t).exp_m1(),
            GammaKind::OneMinusExpNeg => 1.0 - (-t).exp(),
            GammaKind::HalfSqrt => 0.5 * t.sqrt(),
            GammaKind::Log1p => t.ln_1p(),
        }
    }
}

impl fmt::Display for GammaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GammaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" | "identity" => Ok(GammaKind::Identity),
            "g1" => Ok(GammaKind::OneMinusExpNeg),
            "g2" => Ok(GammaKind::HalfSqrt),
            "g3" => Ok(GammaKind::Log1p),
            other => Err(Error::Config(format!(
                "unknown gamma '{other}' (expected id, g1, g2, g3)"
            ))),
        }
    }
}

/// The outer transform φ applied to the averaged γ values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhiKind {
    #[serde(rename = "id")]
    Identity,
    #[serde(rename = "sqrt")]
    Sqrt,
}

impl PhiKind {
    pub const ALL: [PhiKind; 2] = [PhiKind::Identity, PhiKind::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            PhiKind::Identity => "id",
            PhiKind::Sqrt => "sqrt",
        }
    }

    #[inline(always)]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            PhiKind::Identity => t,
            PhiKind::Sqrt => t.sqrt(),
        }
    }

    /// Whether φ is concave on ℝ⁺ (both enumerated choices are).
    pub fn is_concave(self) -> bool {
        true
    }
}

impl fmt::Display for PhiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" | "identity" => Ok(PhiKind::Identity),
            "sqrt" => Ok(PhiKind::Sqrt),
            other => Err(Error::Config(format!(
                "unknown phi '{other}' (expected id, sqrt)"
            ))),
        }
    }
}

/// A (γ, φ) pair selecting one member of the dissimilarity family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DissimilaritySpec {
    pub gamma: GammaKind,
    pub phi: PhiKind,
}

impl DissimilaritySpec {
    /// Scaled squared Euclidean distance d⁻¹‖u − v‖².
    pub const SQUARED_EUCLIDEAN: DissimilaritySpec = DissimilaritySpec {
        gamma: GammaKind::Identity,
        phi: PhiKind::Identity,
    };

    /// Scaled Euclidean distance d^{-1/2}‖u − v‖.
    pub const EUCLIDEAN: DissimilaritySpec = DissimilaritySpec {
        gamma: GammaKind::Identity,
        phi: PhiKind::Sqrt,
    };

    pub const fn new(gamma: GammaKind, phi: PhiKind) -> Self {
        DissimilaritySpec { gamma, phi }
    }
}

impl fmt::Display for DissimilaritySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.gamma, self.phi)
    }
}

/// Evaluates γ(t) for a finite, non-negative `t`.
pub fn gamma_eval(kind: GammaKind, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("gamma argument must be finite and >= 0, got {t}")));
    }
    Ok(kind.apply(t))
}

/// Evaluates φ(t) for a finite, non-negative `t`.
pub fn phi_eval(kind: PhiKind, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("phi argument must be finite and >= 0, got {t}")));
    }
    Ok(kind.apply(t))
}

/// A partition of the coordinate indices `0..dim` into non-empty disjoint blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    dim: usize,
}

impl BlockPartition {
    /// Validates and wraps `blocks` as a partition of `0..dim`.
    pub fn new(blocks: Vec<Vec<usize>>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("partition dimension must be at least 1".into()));
        }
        let mut seen = vec![false; dim];
        for (bi, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Config(format!("block {bi} is empty")));
            }
            for &i in block {
                if i >= dim {
                    return Err(Error::Config(format!(
                        "block {bi} references index {i} outside 0..{dim}"
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Config(format!("index {i} appears in more than one block")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!("index {missing} is not covered by any block")));
        }
        Ok(BlockPartition { blocks, dim })
    }

    /// Every coordinate in its own block (b = d).
    pub fn singletons(dim: usize) -> Self {
        assert!(dim >= 1, "partition dimension must be at least 1");
        BlockPartition {
            blocks: (0..dim).map(|i| vec![i]).collect(),
            dim,
        }
    }

    /// Consecutive blocks of `size` coordinates; `size` must divide `dim`.
    pub fn contiguous(dim: usize, size: usize) -> Result<Self> {
        if size == 0 || dim == 0 || dim % size != 0 {
            return Err(Error::Config(format!(
                "block size {size} must be positive and divide dimension {dim}"
            )));
        }
        Ok(BlockPartition {
            blocks: (0..dim / size)
                .map(|b| (b * size..(b + 1) * size).collect())
                .collect(),
            dim,
        })
    }

    /// Builds a partition from a cluster label per coordinate. Blocks are
    /// ordered by their smallest member.
    pub fn from_assignment(assignment: &[usize]) -> Result<Self> {
        let dim = assignment.len();
        let mut map = std::collections::BTreeMap::<usize, Vec<usize>>::new();
        for (i, &c) in assignment.iter().enumerate() {
            map.entry(c).or_default().push(i);
        }
        let mut blocks: Vec<Vec<usize>> = map.into_values().collect();
        blocks.sort_by_key(|b| b[0]);
        BlockPartition::new(blocks, dim)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_singletons(&self) -> bool {
        self.blocks.len() == self.dim
    }

    /// Same partition with each block sorted and blocks ordered by first member.
    pub fn canonical(&self) -> Self {
        let mut blocks: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        BlockPartition { blocks, dim: self.dim }
    }

    /// Equality as set partitions, ignoring block order and within-block order.
    pub fn same_sets(&self, other: &BlockPartition) -> bool {
        self.canonical() == other.canonical()
    }

    /// True when every block of `self` lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &BlockPartition) -> bool {
        if self.dim != coarser.dim {
            return false;
        }
        let mut owner = vec![0usize; self.dim];
        for (bi, block) in coarser.blocks.iter().enumerate() {
            for &i in block {
                owner[i] = bi;
            }
        }
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&i| owner[i] == owner[b[0]]))
    }
}

fn check_pair(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::Shape {
            expected: u.len(),
            found: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::Shape {
            expected: 1,
            found: 0,
        });
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::Domain("vectors must have finite entries".into()));
    }
    Ok(())
}

/// `φ(d⁻¹ Σ_i γ(|u_i − v_i|²))`.
pub fn h_componentwise(spec: DissimilaritySpec, u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    let mut sum = 0.0;
    for (a, b) in u.iter().zip(v) {
        let diff = a - b;
        sum += spec.gamma.apply(diff * diff);
    }
    Ok(spec.phi.apply(sum / u.len() as f64))
}

/// `φ(b⁻¹ Σ_C γ(|C|⁻¹ ‖u_C − v_C‖²))` over the blocks of `partition`.
pub fn h_blocked(
    spec: DissimilaritySpec,
    partition: &BlockPartition,
    u: &[f64],
    v: &[f64],
) -> Result<f64> {
    check_pair(u, v)?;
    if u.len() != partition.dim() {
        return Err(Error::Shape {
            expected: partition.dim(),
            found: u.len(),
        });
    }
    let mut sum = 0.0;
    for block in partition.blocks() {
        let mut sq = 0.0;
        for &i in block {
            let diff = u[i] - v[i];
            sq += diff * diff;
        }
        sum += spec.gamma.apply(sq * (1.0 / block.len() as f64));
    }
    Ok(spec.phi.apply(sum / partition.num_blocks() as f64))
}
