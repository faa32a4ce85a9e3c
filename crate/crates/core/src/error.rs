use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("K = {k} exceeds the limit of {max} for this operation")]
    KTooLarge { k: usize, max: usize },

    #[error("degenerate game: grand coalition value {0} is negative")]
    DegenerateGame(f64),

    #[error("correlation rho = {rho} is out of range for a coalition of size {size}")]
    RhoOutOfRange { rho: f64, size: usize },

    #[error("decoder {decoder} belongs to the block it is asked to decode")]
    InvalidDecoder { decoder: usize },

    #[error("coalition {0:#b} has no member able to decode its cooperative stream")]
    NoValidDecoder(u32),

    #[error("saddle solver did not converge for coalition {mask:#b} (gap {gap:.3e})")]
    NotConverged { mask: u32, gap: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
