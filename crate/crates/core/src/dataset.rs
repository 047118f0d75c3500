//! Labeled samples and the CSV data format.
//!
//! CSV files are UTF-8 with a header row. The column named `label` holds an
//! integer class code; every other column is a numeric feature. Class codes
//! are mapped to dense indices `0..J` in increasing code order.

use std::io::Read;
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// A labeled `n × d` sample with classes `0..J`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
    class_codes: Vec<i64>,
}

impl Dataset {
    /// Wraps features and dense labels. Every class in `0..J` (J = max label + 1)
    /// must be present, and J ≥ 2.
    pub fn new(features: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let codes = (0..num_classes as i64).collect();
        Dataset::with_codes(features, labels, num_classes, codes)
    }

    /// Like [`Dataset::new`] with explicit class count and external class codes.
    pub fn with_codes(
        features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        class_codes: Vec<i64>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Shape {
                expected: features.nrows(),
                found: labels.len(),
            });
        }
        if features.ncols() == 0 {
            return Err(Error::Config("dataset has no feature columns".into()));
        }
        if num_classes < 2 {
            return Err(Error::Config(format!(
                "classification needs at least 2 classes, found {num_classes}"
            )));
        }
        if class_codes.len() != num_classes {
            return Err(Error::Config("one class code per class is required".into()));
        }
        let mut counts = vec![0usize; num_classes];
        for &l in &labels {
            if l >= num_classes {
                return Err(Error::Config(format!("label {l} outside 0..{num_classes}")));
            }
            counts[l] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InsufficientSample {
                class: empty,
                needed: 1,
                found: 0,
            });
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("features must be finite".into()));
        }
        Ok(Dataset {
            features: features.as_standard_layout().into_owned(),
            labels,
            num_classes,
            class_codes,
        })
    }

    /// Stacks one matrix per class, labeling rows of `parts[j]` as class `j`.
    pub fn from_class_blocks(parts: &[Array2<f64>]) -> Result<Self> {
        let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
        let features = ndarray::concatenate(Axis(0), &views)
            .map_err(|e| Error::Config(format!("class blocks disagree in dimension: {e}")))?;
        let labels = parts
            .iter()
            .enumerate()
            .flat_map(|(j, p)| std::iter::repeat_n(j, p.nrows()))
            .collect();
        Dataset::with_codes(
            features,
            labels,
            parts.len(),
            (0..parts.len() as i64).collect(),
        )
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// External code of each class index (the CSV `label` values).
    pub fn class_codes(&self) -> &[i64] {
        &self.class_codes
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Row indices of each class, in row order.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// The rows at `indices`, keeping the class set (all classes must remain present).
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::with_codes(features, labels, self.num_classes, self.class_codes.clone())
    }

    /// Reads a labeled CSV file.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?;
        let table = read_csv(file)?;
        table.into_dataset()
    }

    /// Writes the dataset in the CSV data format (`label` first).
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["label".to_string()];
        header.extend((0..self.dim()).map(|i| format!("x{i}")));
        w.write_record(&header).map_err(csv_err)?;
        for (i, &l) in self.labels.iter().enumerate() {
            let mut rec = vec![self.class_codes[l].to_string()];
            rec.extend(self.features.row(i).iter().map(|x| format!("{x:?}")));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// A parsed CSV table: features plus optional integer labels.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub feature_names: Vec<String>,
    pub features: Array2<f64>,
    pub labels: Option<Vec<i64>>,
}

impl CsvTable {
    /// Converts to a [`Dataset`]; requires the `label` column.
    pub fn into_dataset(self) -> Result<Dataset> {
        let codes_per_row = self
            .labels
            .ok_or_else(|| Error::Ingest("missing required column 'label'".into()))?;
        let mut codes: Vec<i64> = codes_per_row.clone();
        codes.sort_unstable();
        codes.dedup();
        let labels = codes_per_row
            .iter()
            .map(|c| codes.binary_search(c).expect("code present"))
            .collect();
        let num_classes = codes.len();
        Dataset::with_codes(self.features, labels, num_classes, codes)
    }
}

/// Parses the CSV data format. The `label` column is optional here so that
/// unlabeled test files can be read; row numbers in errors are 1-based data rows.
pub fn read_csv<R: Read>(reader: R) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Ingest(format!("cannot read header: {e}")))?
        .clone();
    let label_col = headers.iter().position(|h| h == "label");
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| Some(c) != label_col).collect();
    if feature_cols.is_empty() {
        return Err(Error::Ingest("no feature columns".into()));
    }
    let feature_names = feature_cols.iter().map(|&c| headers[c].to_string()).collect();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for (r, rec) in rdr.records().enumerate() {
        let row = r + 1;
        let rec = rec.map_err(|e| Error::Ingest(format!("row {row}: {e}")))?;
        if rec.len() != headers.len() {
            return Err(Error::Ingest(format!(
                "row {row}: expected {} fields, found {}",
                headers.len(),
                rec.len()
            )));
        }
        if let Some(lc) = label_col {
            let raw = &rec[lc];
            let code: i64 = raw.parse().map_err(|_| {
                Error::Ingest(format!("row {row}, column 'label': '{raw}' is not an integer"))
            })?;
            labels.push(code);
        }
        for &c in &feature_cols {
            let raw = &rec[c];
            let name = &headers[c];
            if raw.is_empty() {
                return Err(Error::Ingest(format!("row {row}, column '{name}': missing value")));
            }
            let v: f64 = raw.parse().map_err(|_| {
                Error::Ingest(format!("row {row}, column '{name}': '{raw}' is not a number"))
            })?;
            if !v.is_finite() {
                return Err(Error::Ingest(format!("row {row}, column '{name}': non-finite value")));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Ingest("no data rows".into()));
    }
    let features = Array2::from_shape_vec((rows, feature_cols.len()), values)
        .expect("row-major fill");
    Ok(CsvTable {
        feature_names,
        features,
        labels: label_col.map(|_| labels),
    })
}

/// Reads a CSV file (label column optional).
pub fn read_csv_path(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?;
    read_csv(file)
}
