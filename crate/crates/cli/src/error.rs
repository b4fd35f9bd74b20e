use std::fmt;

use stackfuse::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Runtime,
}

/// A one-line diagnostic and the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Config, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Data, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Runtime, message: message.into() }
    }

    /// 2 config, 3 data, 4 runtime.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Runtime => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Config => "config error",
            ErrorKind::Data => "data error",
            ErrorKind::Runtime => "runtime error",
        };
        // Keep diagnostics on one line.
        write!(f, "{kind}: {}", self.message.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}

/// Library errors raised while reading inputs or training: bad settings are
/// config errors, everything about the data itself is a data error.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidFraction(_) => CliError::config(e.to_string()),
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Format { .. }
            | Error::InvalidDimension(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidLabel { .. }
            | Error::MissingSubject(_)
            | Error::InsufficientData(_)
            | Error::EmptySet(_)
            | Error::UndefinedClass(_) => CliError::data(e.to_string()),
        }
    }
}

/// For failures while writing outputs.
pub fn output_error(e: impl fmt::Display) -> CliError {
    CliError::runtime(format!("writing outputs: {e}"))
}
