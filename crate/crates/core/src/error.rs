use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Total variation is only defined here for univariate networks.
    #[error("unsupported dimension: expected d = 1, got d = {0}")]
    UnsupportedDimension(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported sample size {n}: must be in [{min}, {max}]")]
    UnsupportedSampleSize { n: usize, min: usize, max: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
