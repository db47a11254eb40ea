use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector must have at least one coordinate")]
    EmptyVector,

    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },

    #[error("vector norm {norm:e} is below the rank tolerance")]
    NearZero { norm: f64 },

    #[error("vector is not unit norm (norm = {norm})")]
    NotUnit { norm: f64 },

    #[error("index {index} out of range for ground set of size {ground_size}")]
    IndexOutOfRange { index: usize, ground_size: usize },

    #[error("invalid matroid: {0}")]
    InvalidMatroid(String),

    #[error("invalid instance field `{field}`: {reason}")]
    InvalidInstance { field: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
}
