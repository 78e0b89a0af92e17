use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("assembly failed: {0}")]
    Assembly(String),
    #[error("vector layout does not match the system")]
    LayoutMismatch,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("{what} did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("system of dimension {dofs} exceeds the dense limit {limit}")]
    TooLarge { dofs: usize, limit: usize },
    #[error("reduced correction system is singular")]
    SingularReduced,
    #[error("{0} is singular")]
    Singular(&'static str),
    #[error("updated residual drifted from a fresh evaluation: {drift:e} against scale {scale:e}")]
    ResidualDrift { drift: f64, scale: f64 },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
