use std::path::Path;

use super::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::textfmt::fmt_f64;

/// Column layout of a sample CSV. Every column that is neither the label nor
/// the person column is a feature, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub feature_count: usize,
    pub label_col: usize,
    pub person_col: Option<usize>,
    pub num_classes: Option<usize>,
    /// `None` detects a header: the first row is skipped if any cell is not numeric.
    pub has_header: Option<bool>,
}

impl CsvSchema {
    /// Layout produced by [`write_csv`] for `feature_count` features.
    pub fn written(feature_count: usize) -> Self {
        CsvSchema {
            feature_count,
            label_col: feature_count,
            person_col: Some(feature_count + 1),
            num_classes: None,
            has_header: Some(true),
        }
    }

    fn width(&self) -> usize {
        self.feature_count + 1 + usize::from(self.person_col.is_some())
    }
}

pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let width = schema.width();
    if schema.label_col >= width || schema.person_col.is_some_and(|p| p >= width || p == schema.label_col) {
        return Err(Error::InvalidConfig(format!("label/person columns do not fit a {width}-column layout")));
    }
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let parse_err = |row: usize, message: String| Error::Parse { path: path.to_path_buf(), row, message };

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = record.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 {
            let header = schema.has_header.unwrap_or_else(|| record.iter().any(|c| c.parse::<f64>().is_err()));
            if header {
                continue;
            }
        }
        if record.len() != width {
            return Err(parse_err(row, format!("expected {width} columns, found {}", record.len())));
        }
        let mut features = Vec::with_capacity(schema.feature_count);
        let mut label = 0;
        let mut person = None;
        for (col, cell) in record.iter().enumerate() {
            if col == schema.label_col {
                label = cell
                    .parse::<usize>()
                    .map_err(|_| parse_err(row, format!("label `{cell}` is not a class index")))?;
                if let Some(c) = schema.num_classes {
                    if label >= c {
                        return Err(parse_err(row, format!("label {label} is not below the declared {c} classes")));
                    }
                }
            } else if Some(col) == schema.person_col {
                if !cell.is_empty() {
                    person = Some(
                        cell.parse::<u32>()
                            .map_err(|_| parse_err(row, format!("person `{cell}` is not a nonnegative integer")))?,
                    );
                }
            } else {
                let v = cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(row, format!("`{cell}` is not a finite number")))?;
                features.push(v);
            }
        }
        samples.push(Sample { features, label, person });
    }
    let name = path.file_stem().map_or_else(|| "csv".to_owned(), |s| s.to_string_lossy().into_owned());
    Dataset::new(name, samples, schema.num_classes)
}

/// Writes `f0..f{m-1},label,person` with 17-significant-digit features; the
/// person cell is empty for samples without one.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(ds.len() * (ds.feature_len() * 24 + 8));
    for j in 0..ds.feature_len() {
        out.push_str(&format!("f{j},"));
    }
    out.push_str("label,person\n");
    for s in ds.samples() {
        for &f in &s.features {
            out.push_str(&fmt_f64(f));
            out.push(',');
        }
        out.push_str(&s.label.to_string());
        out.push(',');
        if let Some(p) = s.person {
            out.push_str(&p.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: ::csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse { path: path.to_path_buf(), row, message: format!("{other:?}") },
    }
}
