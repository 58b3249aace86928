use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: invalid config: {message}", path.display())]
    ConfigFile { path: PathBuf, message: String },

    #[error("{source_name}: no observation rows")]
    EmptyInput { source_name: String },

    #[error("{source_name}: row {row}, column {column}: {message}")]
    Cell {
        source_name: String,
        row: u64,
        column: usize,
        message: String,
    },

    #[error("{source_name}: row {row}: expected {expected} columns, got {got}")]
    Width {
        source_name: String,
        row: u64,
        expected: usize,
        got: usize,
    },

    #[error(transparent)]
    Core(#[from] srcusum_core::Error),
}

impl CliError {
    /// 1 for bad input or configuration, 2 for failures during a run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Write { .. } => 2,
            CliError::Core(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
