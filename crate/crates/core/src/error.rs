use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("no effective replications: {censored} censored, {false_alarms} false alarms out of {total}")]
    EmptyResult {
        total: u64,
        censored: u64,
        false_alarms: u64,
    },
}

impl Error {
    /// True for errors caused by bad user input or configuration, as opposed
    /// to failures during a run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Dimension { .. } | Error::Config(_)
        )
    }
}
