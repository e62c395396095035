use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Validation of parameter sets never goes through this type; it produces a
/// [`crate::params::ValidationReport`] instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("arithmetic overflow computing {what} at level {level}")]
    Overflow { what: &'static str, level: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coordinate out of bounds: {0}")]
    Bounds(String),

    #[error("invalid path at step {index}: {reason}")]
    InvalidPath { index: usize, reason: String },

    #[error("block too short: {0}")]
    NoFullChunk(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("sampling budget exhausted after {attempts} attempts (acceptance rate {accepted}/{attempts})")]
    SamplingBudget { attempts: usize, accepted: usize },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("no admissible choice: {0}")]
    Exhausted(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
