use thiserror::Error;

/// Errors produced anywhere in the certification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no heralding events: signal probability is zero")]
    NoHerald,

    #[error("insufficient coincidences: {0}")]
    InsufficientCoincidences(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("incomplete dataset, missing: {}", .0.join(", "))]
    IncompleteDataset(Vec<String>),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("unstable statistics: {failed} of {total} resamples failed")]
    UnstableStatistics { failed: usize, total: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
