//! Monte-Carlo estimates of the separability constants between two classes.
//!
//! With `h̃(j, j′) = φ(b⁻¹ Σ_C E γ(|C|⁻¹‖U_C − V_C‖²))` for independent
//! `U ~ F_j`, `V ~ F_j′`:
//!
//! ```text
//! ξ̃(1,2) = h̃(1,2) − (h̃(1,1) + h̃(2,2)) / 2
//! τ̃(1,2) = n₁/(n−1)·|h̃(1,2) − h̃(1,1)| + (n₂−1)/(n−1)·|h̃(1,2) − h̃(2,2)|
//! τ̃(2,1) = (n₁−1)/(n−1)·|h̃(1,2) − h̃(1,1)| + n₂/(n−1)·|h̃(1,2) − h̃(2,2)|
//! ```
//!
//! Classes 1 and 2 above are model classes 0 and 1. Each `h̃` uses its own
//! independent draws; standard errors use the delta method.

use serde::{Deserialize, Serialize};

use crate::dissimilarity::{BlockPartition, DissimilaritySpec, PhiKind};
use crate::error::{Error, Result};
use crate::exec;
use crate::gram::BlockLayout;
use crate::population::ExampleSpec;
use crate::rng;

const DOMAIN: u64 = 0x736570;
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityErrors {
    pub xi_12: f64,
    pub tau_12: f64,
    pub tau_21: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityEstimate {
    pub xi_12: f64,
    pub tau_12: f64,
    pub tau_21: f64,
    pub h_11: f64,
    pub h_22: f64,
    pub h_12: f64,
    pub mc_size: usize,
    pub std_errors: SeparabilityErrors,
}

/// Mean of `b⁻¹ Σ γ(·)` over `mc_size` pairs and its standard error.
fn mean_gamma(
    example: &ExampleSpec,
    spec: DissimilaritySpec,
    layout: &BlockLayout,
    classes: (usize, usize),
    which: u64,
    mc_size: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let chunks = mc_size.div_ceil(CHUNK);
    let sums = exec::map_indexed(chunks, |c| -> Result<(f64, f64)> {
        let count = CHUNK.min(mc_size - c * CHUNK);
        let mut r = rng::stream(seed, DOMAIN + which, c as u64);
        let u = layout.arrange(example.sample(classes.0, count, &mut r)?.view());
        let v = layout.arrange(example.sample(classes.1, count, &mut r)?.view());
        let (mut s, mut s2) = (0.0, 0.0);
        for (a, b) in u.rows().into_iter().zip(v.rows()) {
            let g = layout.gamma_mean(
                spec.gamma,
                a.as_slice().expect("standard layout"),
                b.as_slice().expect("standard layout"),
            );
            s += g;
            s2 += g * g;
        }
        Ok((s, s2))
    });
    let (mut s, mut s2) = (0.0, 0.0);
    for part in sums {
        let (a, b) = part?;
        s += a;
        s2 += b;
    }
    let n = mc_size as f64;
    let mean = s / n;
    let var = (s2 - n * mean * mean).max(0.0) / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// φ(m) and the delta-method standard error.
fn outer(phi: PhiKind, mean: f64, se: f64) -> (f64, f64) {
    match phi {
        PhiKind::Identity => (mean, se),
        PhiKind::Sqrt => {
            let h = mean.sqrt();
            (h, if h > 0.0 { se / (2.0 * h) } else { 0.0 })
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn estimate_separability(
    example: &ExampleSpec,
    spec: DissimilaritySpec,
    partition: &BlockPartition,
    n1: usize,
    n2: usize,
    mc_size: usize,
    seed: u64,
) -> Result<SeparabilityEstimate> {
    example.validate()?;
    if partition.dim() != example.d {
        return Err(Error::Shape {
            expected: example.d,
            found: partition.dim(),
        });
    }
    if mc_size < 2 {
        return Err(Error::Config("mc_size must be at least 2".into()));
    }
    if n1 < 1 || n2 < 1 || n1 + n2 < 2 {
        return Err(Error::Config("class sizes must be positive with n1 + n2 >= 2".into()));
    }
    let layout = BlockLayout::new(partition);
    let est = |classes, which| -> Result<(f64, f64)> {
        let (m, se) = mean_gamma(example, spec, &layout, classes, which, mc_size, seed)?;
        Ok(outer(spec.phi, m, se))
    };
    let (h11, s11) = est((0, 0), 0)?;
    let (h22, s22) = est((1, 1), 1)?;
    let (h12, s12) = est((0, 1), 2)?;

    let n = (n1 + n2) as f64;
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let (g1, g2) = (h12 - h11, h12 - h22);
    let (sg1, sg2) = (sign(g1), sign(g2));
    let tau = |a: f64, b: f64| -> (f64, f64) {
        let value = a * g1.abs() + b * g2.abs();
        let d12 = a * sg1 + b * sg2;
        let se = ((d12 * s12).powi(2) + (a * sg1 * s11).powi(2) + (b * sg2 * s22).powi(2)).sqrt();
        (value, se)
    };
    let (tau_12, se_t12) = tau(n1f / (n - 1.0), (n2f - 1.0) / (n - 1.0));
    let (tau_21, se_t21) = tau((n1f - 1.0) / (n - 1.0), n2f / (n - 1.0));
    Ok(SeparabilityEstimate {
        xi_12: h12 - 0.5 * (h11 + h22),
        tau_12,
        tau_21,
        h_11: h11,
        h_22: h22,
        h_12: h12,
        mc_size,
        std_errors: SeparabilityErrors {
            xi_12: (s12 * s12 + 0.25 * (s11 * s11 + s22 * s22)).sqrt(),
            tau_12: se_t12,
            tau_21: se_t21,
        },
    })
}
