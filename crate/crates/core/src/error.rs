use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Quadrature or special-function evaluation did not reach the requested accuracy.
    #[error("numeric error: {message} (best estimate error {achieved:.3e})")]
    Numeric { message: String, achieved: f64 },

    #[error("singular matching system for l = {l} (pivot ratio {condition:.3e})")]
    Singular { l: usize, condition: f64 },

    /// A solution was produced but failed its residual or truncation check.
    #[error("convergence error: {message} (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    Convergence { message: String, residual: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// `true` for failures caused by numerics rather than bad input.
    pub fn is_numeric(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_))
    }
}
