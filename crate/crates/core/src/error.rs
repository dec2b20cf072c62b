use alloc::string::String;

/// Errors reported by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A query needs sites or couplings beyond the sampled window.
    #[error("window too small: need radius {needed}, covered {covered}")]
    WindowTooSmall { needed: f64, covered: f64 },
    #[error("enumeration budget exceeded: {sites} uncertain sites (limit {limit})")]
    BudgetExceeded { sites: usize, limit: usize },
    #[error("construction refused: {0}")]
    Refused(String),
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
