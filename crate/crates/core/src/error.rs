//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the spectral core, the integrators, and the lab.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Two fields that must live on the same frequency lattice do not.
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A time grid is empty, unsorted, or otherwise unusable.
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    /// The solution left the trusted regime (non-finite values or a norm
    /// beyond the blow-up threshold).
    #[error("solution blow-up at step {step}: {reason}")]
    BlowUp { step: usize, reason: String },

    /// An adaptive search failed to satisfy its target within its budget.
    #[error("search failed: {0}")]
    SearchFailed(String),
}

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
