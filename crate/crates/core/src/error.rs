use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("entry count {len} does not match a {rows}x{cols} matrix")]
    BadShape {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("closed loop is not stable: spectral radius {rho} >= 1 - {margin}")]
    UnstableClosedLoop { rho: f64, margin: f64 },

    #[error("closed loop became unstable at step {step}: spectral radius {rho}")]
    UnstableAtStep { step: usize, rho: f64 },

    #[error("linear system is numerically singular: {0}")]
    Singular(&'static str),

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("iteration did not converge within {iterations} iterations (last change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Numerical failures, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UnstableClosedLoop { .. }
                | Error::UnstableAtStep { .. }
                | Error::Singular(_)
                | Error::EigenNoConvergence
                | Error::NoConvergence { .. }
        )
    }
}
