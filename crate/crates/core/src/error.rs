use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix or vector shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Not enough samples to estimate the requested statistics.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The data do not span a subspace of the requested dimension.
    #[error("degenerate subspace: requested dimension {requested}, data rank {rank}")]
    DegenerateSubspace { requested: usize, rank: usize },

    /// Training labels contain a single class.
    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    /// A numerical routine failed (non-symmetric input, indefinite matrix, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn dimension(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
