//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by parsing, aggregation, modeling, and backtesting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    /// Row-level parse failures, each carrying its 1-based line number.
    /// Raised when the error rate exceeds the configured tolerance.
    #[error("{} malformed row(s) out of {total}, first: {}", errors.len(), errors.first().map(|e| e.to_string()).unwrap_or_default())]
    MalformedRows { errors: Vec<RowError>, total: usize },

    #[error("invalid poll series: {0}")]
    InvalidPolls(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("cannot differentiate: need at least 2 periods, got {0}")]
    TooFewPeriods(usize),

    #[error("insufficient periods for backtest: need at least {required}, got {available}")]
    InsufficientPeriods { required: usize, available: usize },

    #[error("feature count mismatch: model has {expected} columns, input has {got}")]
    ColumnMismatch { expected: usize, got: usize },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },

    #[error("empty design matrix")]
    EmptyMatrix,

    #[error("selection k={k} exceeds available columns ({columns})")]
    SelectionTooLarge { k: usize, columns: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

/// One malformed input row: line number (1-based, header included) and cause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
