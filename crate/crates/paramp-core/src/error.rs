//! Error taxonomy shared by every module.
//!
//! Three semantic classes matter to callers (and map to CLI exit codes):
//! invalid *inputs* (malformed data, broken invariants — exit 2),
//! *domain* violations (arguments outside the mathematical domain of an
//! operation — exit 3), and *estimation* failures (not enough data to form
//! an estimate — exit 2). IO and serialization problems are wrapped so the
//! pipeline can surface file/line context.

use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Input data violates a structural invariant (bad probabilities,
    /// mismatched lengths, malformed rows, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A statistical estimate cannot be formed from the supplied records.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Filesystem failure while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV parse or write failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// JSON parse or write failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    /// Build an [`CoreError::InvalidInput`] from anything displayable.
    pub fn invalid(msg: impl std::fmt::Display) -> Self {
        CoreError::InvalidInput(msg.to_string())
    }

    /// Build a [`CoreError::Domain`] from anything displayable.
    pub fn domain(msg: impl std::fmt::Display) -> Self {
        CoreError::Domain(msg.to_string())
    }

    /// True when the error is a domain violation (CLI exit code 3);
    /// everything else is treated as a validation/IO failure (exit code 2).
    pub fn is_domain(&self) -> bool {
        matches!(self, CoreError::Domain(_))
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
