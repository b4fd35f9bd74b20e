//! Command implementations behind the `stackfuse` binary.

pub mod commands;
pub mod config;
pub mod error;

pub use config::ExperimentConfig;
pub use error::CliError;
