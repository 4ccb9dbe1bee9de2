use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (min eigenvalue {min_eig:e}, max eigenvalue {max_eig:e})")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("matrix is numerically singular: {0}")]
    SingularMatrix(String),

    #[error("Jacobian is singular at x = {x:?}")]
    SingularJacobian { x: Vec<f64> },

    #[error("non-finite objective value at x = {x:?}")]
    NonFinite { x: Vec<f64> },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
