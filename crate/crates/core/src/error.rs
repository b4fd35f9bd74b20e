use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch { expected: usize, actual: usize, context: &'static str },

    #[error("empty set: {0}")]
    EmptySet(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid label {label} for {num_classes} classes")]
    InvalidLabel { label: usize, num_classes: usize },

    #[error("invalid split fractions: {0}")]
    InvalidFraction(String),

    #[error("person {0} does not occur in the dataset")]
    MissingSubject(u32),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("class {0} has no samples, recall is undefined")]
    UndefinedClass(usize),

    #[error("{path}: row {row}: {message}")]
    Parse { path: PathBuf, row: usize, message: String },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}
