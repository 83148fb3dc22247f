//! Datasets: synthetic generators and CSV ingestion with encoding plans.

mod plan;
mod synth;

pub use plan::{load_csv, parse_csv, ColumnKind, ColumnPlan, EncodingPlan, LabelColumn, Scaling};
pub use synth::{gen_sinc, gen_spiral, gen_xor, sinc, SincConfig, SpiralConfig};

use crate::linalg::Matrix;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },
    #[error("unknown category `{value}` at row {row}, column {col}")]
    UnknownCategory {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("plan line {line}: {message}")]
    Plan { line: usize, message: String },
    #[error("dataset is empty")]
    Empty,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Provenance of a dataset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetMeta {
    pub source: String,
    pub seed: Option<u64>,
    /// Leading rows that are noiseless (the sinc generator puts them first).
    pub clean_rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `m x d` features.
    pub x: Matrix,
    /// `m x q` targets; the indicator matrix of `labels` when those are present
    /// (a single 0/1 column for two-class sets built with `q = 1`).
    pub y: Matrix,
    pub labels: Option<Vec<usize>>,
    pub class_names: Option<Vec<String>>,
    pub meta: DatasetMeta,
}

/// One-hot `m x classes` matrix.
pub fn indicator(labels: &[usize], classes: usize) -> Matrix {
    Matrix::from_fn(labels.len(), classes, |i, j| {
        if labels[i] == j {
            1.0
        } else {
            0.0
        }
    })
}

impl Dataset {
    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.class_names
            .as_ref()
            .map(Vec::len)
            .or_else(|| self.labels.as_ref().map(|l| l.iter().max().map_or(0, |m| m + 1)))
    }

    /// Per-class row counts, indexed by class.
    pub fn class_counts(&self) -> Option<Vec<usize>> {
        let labels = self.labels.as_ref()?;
        let mut counts = vec![0; self.num_classes()?];
        for &l in labels {
            counts[l] += 1;
        }
        Some(counts)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let x = Matrix::from_fn(indices.len(), self.x.ncols(), |i, j| self.x[(indices[i], j)]);
        let y = Matrix::from_fn(indices.len(), self.y.ncols(), |i, j| self.y[(indices[i], j)]);
        Dataset {
            x,
            y,
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            class_names: self.class_names.clone(),
            meta: DatasetMeta {
                clean_rows: None,
                ..self.meta.clone()
            },
        }
    }

    /// The first `clean_rows` rows, or everything when no clean prefix is recorded.
    pub fn clean_subset(&self) -> Dataset {
        match self.meta.clean_rows {
            Some(n) => {
                let mut d = self.subset(&(0..n).collect::<Vec<_>>());
                d.meta.clean_rows = Some(n);
                d
            }
            None => self.clone(),
        }
    }

    /// Writes `x1..xd` followed by `label` (classification) or `y1..yq`.
    /// Floats use shortest round-trip formatting so output is reproducible.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.x.ncols();
        let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
        match &self.labels {
            Some(_) => header.push("label".into()),
            None => header.extend((1..=self.y.ncols()).map(|j| format!("y{j}"))),
        }
        w.write_record(&header)?;
        for i in 0..self.rows() {
            let mut rec: Vec<String> = (0..d).map(|j| self.x[(i, j)].to_string()).collect();
            match &self.labels {
                Some(labels) => rec.push(match &self.class_names {
                    Some(names) => names[labels[i]].clone(),
                    None => labels[i].to_string(),
                }),
                None => rec.extend((0..self.y.ncols()).map(|j| self.y[(i, j)].to_string())),
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|source| DataError::Io {
            path: "<csv writer>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Reads the CSV layout produced by [`Dataset::write_csv`]: a header naming
/// `x*` feature columns followed by either `label` or `y*` target columns.
/// Class names sort numerically when they all parse as numbers.
pub fn load_table(path: &Path) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut d = parse_table(std::io::BufReader::new(file))?;
    d.meta.source = path.display().to_string();
    Ok(d)
}

pub fn parse_table<R: std::io::Read>(input: R) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    let x_cols: Vec<usize> = (0..header.len()).filter(|&j| header[j].starts_with('x')).collect();
    let y_cols: Vec<usize> = (0..header.len()).filter(|&j| header[j].starts_with('y')).collect();
    let label_col = header.iter().position(|h| h == "label");
    if x_cols.is_empty() || (label_col.is_none() && y_cols.is_empty()) {
        return Err(DataError::Parse {
            row: 0,
            col: 0,
            message: "header needs x* columns and a `label` or y* columns".into(),
        });
    }
    let number = |row: usize, col: usize, field: &str| -> Result<f64, DataError> {
        field
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| DataError::Parse {
                row,
                col,
                message: format!("`{field}` is not a finite number"),
            })
    };
    let (mut xs, mut ys, mut raw) = (Vec::new(), Vec::new(), Vec::new());
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        for &j in &x_cols {
            xs.push(number(r + 1, j, &rec[j])?);
        }
        match label_col {
            Some(j) => raw.push(rec[j].to_owned()),
            None => {
                for &j in &y_cols {
                    ys.push(number(r + 1, j, &rec[j])?);
                }
            }
        }
    }
    let m = if label_col.is_some() { raw.len() } else { ys.len() / y_cols.len() };
    if m == 0 {
        return Err(DataError::Empty);
    }
    let x = Matrix::from_row_slice(m, x_cols.len(), &xs);
    let meta = DatasetMeta::default();
    if label_col.is_none() {
        let y = Matrix::from_row_slice(m, y_cols.len(), &ys);
        return Ok(Dataset { x, y, labels: None, class_names: None, meta });
    }
    let mut names = raw.clone();
    names.sort();
    names.dedup();
    if names.iter().all(|n| n.parse::<f64>().is_ok()) {
        names.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
    }
    let labels: Vec<usize> = raw
        .iter()
        .map(|l| names.iter().position(|n| n == l).expect("name taken from column"))
        .collect();
    Ok(Dataset {
        x,
        y: indicator(&labels, names.len()),
        labels: Some(labels),
        class_names: Some(names),
        meta,
    })
}

const NURSERY_CLASSES: [&str; 5] = ["not_recom", "recommend", "very_recom", "priority", "spec_prior"];

/// Folds the two-instance `recommend` class of the nursery data into `very_recom`.
pub fn nursery_merge<S: AsRef<str>>(labels: &[S]) -> Result<Vec<String>, DataError> {
    labels
        .iter()
        .map(|l| {
            let l = l.as_ref();
            if !NURSERY_CLASSES.contains(&l) {
                Err(DataError::UnknownLabel(l.to_owned()))
            } else if l == "recommend" {
                Ok("very_recom".to_owned())
            } else {
                Ok(l.to_owned())
            }
        })
        .collect()
}

/// Count of each distinct label, in sorted label order.
pub fn label_histogram<S: AsRef<str>>(labels: &[S]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for l in labels {
        *h.entry(l.as_ref().to_owned()).or_insert(0) += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_rows_are_one_hot() {
        let y = indicator(&[2, 0, 1, 2], 3);
        for i in 0..4 {
            assert_eq!(y.row(i).sum(), 1.0);
        }
        assert_eq!(y.column(2).sum(), 2.0);
    }

    #[test]
    fn nursery_merge_rules() {
        let merged = nursery_merge(&["recommend", "priority", "very_recom"]).unwrap();
        assert_eq!(merged, vec!["very_recom", "priority", "very_recom"]);
        assert!(matches!(
            nursery_merge(&["maybe"]),
            Err(DataError::UnknownLabel(l)) if l == "maybe"
        ));
    }

    #[test]
    fn nursery_merge_counts() {
        let mut labels = Vec::new();
        for (name, n) in [
            ("not_recom", 4320),
            ("recommend", 2),
            ("very_recom", 328),
            ("priority", 4266),
            ("spec_prior", 4044),
        ] {
            labels.extend(std::iter::repeat_n(name, n));
        }
        let h = label_histogram(&nursery_merge(&labels).unwrap());
        assert_eq!(h["very_recom"], 330);
        assert_eq!(h["not_recom"], 4320);
        assert_eq!(h["priority"], 4266);
        assert_eq!(h["spec_prior"], 4044);
        assert!(!h.contains_key("recommend"));
    }

    #[test]
    fn subset_keeps_alignment() {
        let d = gen_xor();
        let s = d.subset(&[3, 0]);
        assert_eq!(s.x.row(0), d.x.row(3));
        assert_eq!(s.labels, Some(vec![1, 0]));
        assert_eq!(s.y[(0, 0)], 1.0);
    }

    #[test]
    fn csv_output_round_trips_floats() {
        let d = gen_sinc(&SincConfig::default());
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x1,y1"));
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(first, vec![d.x[(0, 0)], d.y[(0, 0)]]);
        let back = parse_table(text.as_bytes()).unwrap();
        assert_eq!(back.x, d.x);
        assert_eq!(back.y, d.y);
    }

    #[test]
    fn table_labels_sort_numerically() {
        let text = "x1,label\n0.5,10\n0.1,9\n0.2,10\n";
        let d = parse_table(text.as_bytes()).unwrap();
        assert_eq!(d.class_names, Some(vec!["9".to_string(), "10".to_string()]));
        assert_eq!(d.labels, Some(vec![1, 0, 1]));
        assert_eq!(d.y.ncols(), 2);
    }
}
