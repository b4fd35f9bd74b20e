//! Samples, datasets, target coding, file loaders and the split protocol.

mod csv;
mod idx;
mod split;

pub use self::csv::{load_csv, write_csv, CsvSchema};
pub use self::idx::{load_idx, load_idx_pairs, parse_idx_images, parse_idx_labels, write_idx};
pub use self::split::{SplitPlan, SPLIT_HEADER};

use std::collections::BTreeSet;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::nn::Batch;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
    /// Subject the sample was recorded from; `None` for corpora without subjects.
    pub person: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    samples: Vec<Sample>,
    num_classes: usize,
    feature_len: usize,
}

impl Dataset {
    /// Validates and wraps `samples`. The class count is inferred as
    /// `max label + 1` when not given.
    pub fn new(name: impl Into<String>, samples: Vec<Sample>, num_classes: Option<usize>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::EmptySet("dataset has no samples"));
        };
        let feature_len = first.features.len();
        if feature_len == 0 {
            return Err(Error::InvalidDimension("feature length must be positive".to_owned()));
        }
        let max_label = samples.iter().map(|s| s.label).max().unwrap_or(0);
        let num_classes = num_classes.unwrap_or(max_label + 1);
        if num_classes == 0 {
            return Err(Error::InvalidDimension("class count must be positive".to_owned()));
        }
        for s in &samples {
            if s.features.len() != feature_len {
                return Err(Error::DimensionMismatch {
                    expected: feature_len,
                    actual: s.features.len(),
                    context: "sample feature length",
                });
            }
            if s.label >= num_classes {
                return Err(Error::InvalidLabel { label: s.label, num_classes });
            }
            if !s.features.iter().all(|f| f.is_finite()) {
                return Err(Error::InvalidConfig("sample features must be finite".to_owned()));
            }
        }
        Ok(Dataset { name: name.into(), samples, num_classes, feature_len })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_len(&self) -> usize {
        self.feature_len
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct subject identifiers, ascending.
    pub fn persons(&self) -> Vec<u32> {
        self.samples.iter().filter_map(|s| s.person).collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Feature rows and ±1 one-against-all targets for the given samples.
    pub fn batch(&self, indices: &[usize]) -> Result<Batch> {
        self.batch_with(indices, self.feature_len, |s, row| row.copy_from_slice(&s.features))
    }

    /// Like [`Dataset::batch`] but with inputs produced by `fill`, which writes an
    /// `input_len`-long row for each sample.
    pub fn batch_with<F>(&self, indices: &[usize], input_len: usize, mut fill: F) -> Result<Batch>
    where
        F: FnMut(&Sample, &mut [f64]),
    {
        if indices.is_empty() {
            return Err(Error::EmptySet("no samples selected"));
        }
        let c = self.num_classes;
        let mut inputs = Array2::zeros((indices.len(), input_len));
        let mut targets = Array2::from_elem((indices.len(), c), -1.0);
        for (row, &i) in indices.iter().enumerate() {
            let sample =
                self.samples.get(i).ok_or_else(|| Error::InvalidDimension(format!("sample index {i} out of range")))?;
            fill(sample, inputs.row_mut(row).as_slice_mut().expect("row-major"));
            targets[[row, sample.label]] = 1.0;
        }
        Batch::new(inputs, targets)
    }
}

/// One-against-all target: +1 at `label`, -1 elsewhere.
pub fn encode_targets(label: usize, num_classes: usize) -> Result<Vec<f64>> {
    if label >= num_classes {
        return Err(Error::InvalidLabel { label, num_classes });
    }
    let mut t = vec![-1.0; num_classes];
    t[label] = 1.0;
    Ok(t)
}
