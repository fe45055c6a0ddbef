use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Cholesky hit a pivot at or below the floor.
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not symmetric (max deviation {max_dev:e})")]
    Asymmetric { max_dev: f64 },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("iterate leaves the box |u_ij| <= rho_ij at ({i}, {j})")]
    Infeasible { i: usize, j: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("positive-definiteness fallback exhausted after {halvings} halvings")]
    FallbackExhausted { halvings: usize },

    #[error("line search stalled: step {step:e} underflowed without acceptance")]
    LineSearchStalled { step: f64 },

    #[error("instance generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("malformed matrix file: {0}")]
    MalformedMatrix(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
