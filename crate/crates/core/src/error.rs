use thiserror::Error;

/// Errors produced by the solvers and the codifferential calculus.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in input")]
    NonFinite,
    #[error("vertex set is empty")]
    EmptySet,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot infer the dimension of an expression without affine leaves")]
    UnknownDimension,
    #[error("min-norm solver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("piece count {pieces} exceeds the configured cap {cap}")]
    SizeOverflow { pieces: usize, cap: usize },
    #[error("simplex iteration guard tripped after {iterations} pivots")]
    Degenerate { iterations: usize },
    #[error("index {index} out of range for {len} pieces")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("Armijo backtracking exceeded {max_k} halvings; direction is not a descent direction")]
    ArmijoFailure { max_k: u32 },
    #[error("instance generation failed: {0}")]
    GenerationFailure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
