use thiserror::Error;

/// Failure modes shared by every layer of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument lies on a singularity or outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A specification or scenario violates one of its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Quadrature stopped before reaching the requested tolerance.
    #[error("no convergence: {what} (error estimate {achieved:.3e}, requested {requested:.3e})")]
    Convergence {
        what: String,
        achieved: f64,
        requested: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
