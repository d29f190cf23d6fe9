//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector failed simplex validation (negative mass, bad sum, too few classes).
    #[error("not a distribution: {0}")]
    InvalidDistribution(String),

    /// Inputs that must agree in length or class count do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A class label lies outside the declared range.
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    /// No scoring rule registered under this name.
    #[error("unknown scoring rule `{0}`")]
    UnknownRule(String),

    /// The requested operation is not defined for this rule.
    #[error("rule `{rule}` does not support {what}")]
    Unsupported { rule: String, what: String },

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed or inconsistent input data (CSV ingestion, dataset construction).
    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
