use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A value or an intermediate term exceeds the range of `f64`.
    #[error("overflow in {0}")]
    Overflow(&'static str),
    /// The quantity diverges at the requested point (integrable singularity).
    #[error("singular: {0}")]
    Singular(String),
    #[error("series did not converge within {limit} terms (last partial sum {partial})")]
    Convergence { limit: usize, partial: f64 },
    #[error("quadrature did not converge: estimate {estimate}, error estimate {error}")]
    Quadrature { estimate: f64, error: f64 },
    /// A configuration violates a precondition of the operation.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
