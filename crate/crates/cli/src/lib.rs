//! Command implementations behind the `kef` binary.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

use kef_core::solver::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("admissibility condition fails: {0}")]
    Admissibility(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("monitor failures:\n  {}", .0.join("\n  "))]
    Monitor(Vec<String>),
    #[error("replay mismatch: {0}")]
    Replay(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Admissibility(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<kef_core::fields::FieldError> for CliError {
    fn from(e: kef_core::fields::FieldError) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Worker pool of the requested size; `0` means one per available core.
pub fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Io(e.to_string()))
}
