//! Experiment runner behind the `erw-cli` binary: JSON configs in, CSV or
//! JSON result tables out. Split from the binary so the acceptance tests
//! can drive every stage in-process.

pub mod config;
pub mod runner;
pub mod table;

use std::path::PathBuf;

use thiserror::Error;

/// Runner failures, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or out-of-range configuration input (exit 2).
    #[error("config error: {0}")]
    Config(String),
    /// Well-formed config that asks for something outside the model's
    /// domain (exit 3).
    #[error("domain error: {0}")]
    Domain(String),
    /// Request exceeding an exact-enumeration cap (exit 4).
    #[error("resource error: {0}")]
    Resource(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Resource(_) => 4,
        }
    }
}

impl From<erw::Error> for CliError {
    fn from(err: erw::Error) -> Self {
        match err {
            erw::Error::ProbabilityRange { .. } => CliError::Config(err.to_string()),
            erw::Error::EnumerationCap { .. } => CliError::Resource(err.to_string()),
            _ => CliError::Domain(err.to_string()),
        }
    }
}
