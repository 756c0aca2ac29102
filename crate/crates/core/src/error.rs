use std::path::PathBuf;

use thiserror::Error;

/// Every failure the kit can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown morphology `{0}` (expected one of queen, bastion, tick, leaper or a config path)")]
    UnknownMorphology(String),

    #[error("morphology validation failed:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical blow-up at t={time:.4}s: {detail}")]
    NumericalBlowup { time: f64, detail: String },

    #[error("environment must be reset before stepping")]
    NotReset,

    #[error("config error in {path:?}: {msg}")]
    Config { path: Option<PathBuf>, msg: String },

    #[error("buffer schema mismatch at byte {offset}: {msg}")]
    Schema { offset: u64, msg: String },

    #[error("replay mismatch at row {row}: {msg}")]
    ReplayMismatch { row: usize, msg: String },

    #[error("external policy protocol error: {0}")]
    Protocol(String),

    #[error("report requested with zero episodes")]
    EmptyReport,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}
