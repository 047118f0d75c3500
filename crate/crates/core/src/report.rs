//! Report serialization.
//!
//! JSON documents have a top-level `config` echo, the `generator` name and a
//! `cells` array of [`ReportCell`](crate::harness::ReportCell) objects with
//! fields in declaration order. CSV output has one row per cell with the
//! columns in [`CSV_COLUMNS`].

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::EvalReport;

pub const CSV_COLUMNS: [&str; 11] = [
    "classifier",
    "gamma",
    "phi",
    "d",
    "blocking",
    "mean_rate",
    "dispersion",
    "std_error",
    "reps",
    "best_gamma",
    "mean_chosen_p",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!("unknown format '{other}' (expected json, csv)"))),
        }
    }
}

pub fn emit_report(report: &EvalReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(CSV_COLUMNS).map_err(err)?;
            for c in &report.cells {
                let chosen = c
                    .chosen_p
                    .as_ref()
                    .map(|p| (p.iter().sum::<f64>() / p.len() as f64).to_string())
                    .unwrap_or_default();
                w.write_record([
                    c.classifier.name().to_string(),
                    c.gamma.name().to_string(),
                    c.phi.name().to_string(),
                    c.d.to_string(),
                    c.blocking.clone(),
                    c.mean_rate.to_string(),
                    c.dispersion.to_string(),
                    c.std_error.to_string(),
                    c.reps.to_string(),
                    c.best_gamma.to_string(),
                    chosen,
                ])
                .map_err(err)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.to_string()))
        }
    }
}

/// Emits flat records: a JSON array, or CSV with a header from the field names.
pub fn emit_rows<T: Serialize>(rows: &[T], format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(rows)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Error::Io(e.to_string()))
        }
    }
}

/// Parses a JSON report produced by [`emit_report`].
pub fn parse_report_json(bytes: &[u8]) -> Result<EvalReport> {
    Ok(serde_json::from_slice(bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::Method;
    use crate::dissimilarity::{GammaKind, PhiKind};
    use crate::harness::{ExperimentConfig, ReportCell};
    use crate::population::ExampleId;

    fn report(cells: Vec<ReportCell>) -> EvalReport {
        EvalReport {
            config: ExperimentConfig::for_example(ExampleId::Ex1, vec![10], vec![Method::Nn], vec![]),
            generator: "test".into(),
            cells,
        }
    }

    fn cell() -> ReportCell {
        ReportCell {
            classifier: Method::NnGgmadd,
            gamma: GammaKind::HalfSqrt,
            phi: PhiKind::Identity,
            d: 10,
            blocking: "loocv".into(),
            mean_rate: 0.1 + 0.2,
            dispersion: 1.0 / 3.0,
            std_error: 0.01,
            reps: 2,
            rates: vec![0.1, 0.5],
            chosen_p: Some(vec![0.0, 0.9]),
            best_gamma: true,
        }
    }

    #[test]
    fn empty_report() {
        let r = report(vec![]);
        let csv = emit_report(&r, ReportFormat::Csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1);
        assert_eq!(parse_report_json(&emit_report(&r, ReportFormat::Json).unwrap()).unwrap(), r);
    }

    #[test]
    fn one_cell_round_trips() {
        let r = report(vec![cell()]);
        let json = emit_report(&r, ReportFormat::Json).unwrap();
        assert_eq!(parse_report_json(&json).unwrap(), r);
        let csv = String::from_utf8(emit_report(&r, ReportFormat::Csv).unwrap()).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].starts_with("nn-ggmadd,g2,id,10,loocv,0.30000000000000004,"), "{}", rows[1]);
        assert!(rows[1].ends_with(",2,true,0.45"));
    }

    #[test]
    fn flat_rows() {
        #[derive(Serialize)]
        struct Row {
            d: usize,
            risk: f64,
        }
        let rows = [Row { d: 10, risk: 0.25 }];
        let csv = emit_rows(&rows, ReportFormat::Csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "d,risk\n10,0.25\n");
        let json: serde_json::Value = serde_json::from_slice(&emit_rows(&rows, ReportFormat::Json).unwrap()).unwrap();
        assert_eq!(json[0]["risk"], 0.25);
    }

    #[test]
    fn formats_parse() {
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
