//! Monte-Carlo Bayes risk of a two-class model with equal priors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::population::ExampleSpec;
use crate::rng;

const DOMAIN: u64 = 0x6261796573;
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesEstimate {
    pub risk: f64,
    pub std_error: f64,
    pub mc_size: usize,
}

/// Error rate of the density-ratio rule, from `mc_size` draws split evenly
/// between the classes. Exact density ties count as half an error.
pub fn estimate_bayes_risk(example: &ExampleSpec, mc_size: usize, seed: u64) -> Result<BayesEstimate> {
    example.validate()?;
    if mc_size < 2 {
        return Err(Error::Config("mc_size must be at least 2".into()));
    }
    let per_class = [mc_size / 2, mc_size - mc_size / 2];
    let mut parts = [(0.0f64, 0.0f64); 2];
    for class in 0..2 {
        let n = per_class[class];
        let chunks = n.div_ceil(CHUNK);
        let sums = exec::map_indexed(chunks, |c| -> Result<(f64, f64)> {
            let count = CHUNK.min(n - c * CHUNK);
            let mut r = rng::stream(seed, DOMAIN, rng::stream_id(c as u64, class as u64));
            let x = example.sample(class, count, &mut r)?;
            let (mut s, mut s2) = (0.0, 0.0);
            for row in x.rows() {
                let row = row.as_slice().expect("standard layout");
                let own = example.log_density(class, row)?;
                let other = example.log_density(1 - class, row)?;
                let e = if other > own {
                    1.0
                } else if other == own {
                    0.5
                } else {
                    0.0
                };
                s += e;
                s2 += e * e;
            }
            Ok((s, s2))
        });
        let (mut s, mut s2) = (0.0, 0.0);
        for part in sums {
            let (a, b) = part?;
            s += a;
            s2 += b;
        }
        let nf = n as f64;
        let mean = s / nf;
        let var = if n > 1 { (s2 - nf * mean * mean).max(0.0) / (nf - 1.0) } else { 0.0 };
        parts[class] = (mean, var / nf);
    }
    Ok(BayesEstimate {
        risk: 0.5 * (parts[0].0 + parts[1].0),
        std_error: 0.5 * (parts[0].1 + parts[1].1).sqrt(),
        mc_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::ExampleId;

    #[test]
    fn diagnostics() {
        let same = ExampleSpec::new(ExampleId::Identical, 5).unwrap();
        let est = estimate_bayes_risk(&same, 10_000, 1).unwrap();
        assert!((est.risk - 0.5).abs() <= 3.0 * est.std_error + 1e-12);
        let apart = ExampleSpec::new(ExampleId::Disjoint, 5).unwrap();
        let est = estimate_bayes_risk(&apart, 10_000, 1).unwrap();
        assert_eq!(est.risk, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn reproducible() {
        let ex = ExampleSpec::new(ExampleId::Ex3, 8).unwrap();
        let a = estimate_bayes_risk(&ex, 5_001, 9).unwrap();
        assert_eq!(a, estimate_bayes_risk(&ex, 5_001, 9).unwrap());
        assert!(a.risk > 0.0 && a.risk < 0.5);
        assert!(estimate_bayes_risk(&ex, 1, 9).is_err());
    }
}
