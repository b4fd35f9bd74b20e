use crate::dataset::Sample;
use crate::error::{Error, Result};

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        ConfusionMatrix { num_classes, counts: vec![0; num_classes * num_classes] }
    }

    /// Builds a matrix from explicit rows.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let c = rows.len();
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::InvalidDimension("confusion matrix must be square".to_owned()));
        }
        Ok(ConfusionMatrix { num_classes: c, counts: rows.concat() })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        for label in [truth, predicted] {
            if label >= self.num_classes {
                return Err(Error::InvalidLabel { label, num_classes: self.num_classes });
            }
        }
        self.counts[truth * self.num_classes + predicted] += 1;
        Ok(())
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.num_classes + predicted]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.num_classes..(truth + 1) * self.num_classes]
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        self.row(truth).iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.num_classes).map(|c| self.get(c, c)).sum()
    }

    /// Trace over total; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.correct() as f64 / t as f64,
        }
    }

    pub fn recall(&self, class: usize) -> Result<f64> {
        match self.row_sum(class) {
            0 => Err(Error::UndefinedClass(class)),
            n => Ok(self.get(class, class) as f64 / n as f64),
        }
    }

    /// Recognition rate of every class; fails on the first class without samples.
    pub fn per_class_recall(&self) -> Result<Vec<f64>> {
        (0..self.num_classes).map(|c| self.recall(c)).collect()
    }

    /// Fixed-width text rendering with true classes as rows.
    pub fn render(&self) -> String {
        let width =
            self.counts.iter().map(|v| v.to_string().len()).max().unwrap_or(1).max(self.num_classes.to_string().len())
                + 1;
        let mut s = format!("{:>6}", "t\\p");
        for p in 0..self.num_classes {
            s.push_str(&format!("{p:>width$}"));
        }
        s.push('\n');
        for t in 0..self.num_classes {
            s.push_str(&format!("{t:>6}"));
            for v in self.row(t) {
                s.push_str(&format!("{v:>width$}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Runs `predict` on every sample and tallies the outcomes.
pub fn evaluate<'a, F, I>(mut predict: F, samples: I, num_classes: usize) -> Result<ConfusionMatrix>
where
    F: FnMut(&[f64]) -> Result<usize>,
    I: IntoIterator<Item = &'a Sample>,
{
    let mut cm = ConfusionMatrix::new(num_classes);
    for s in samples {
        let p = predict(&s.features)?;
        cm.record(s.label, p)?;
    }
    if cm.total() == 0 {
        return Err(Error::EmptySet("no samples to evaluate"));
    }
    Ok(cm)
}
