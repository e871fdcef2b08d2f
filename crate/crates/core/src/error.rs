use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Configuration problem, reported with the offending key path.
    #[error("{path}: {message}")]
    Config { path: String, message: String },

    /// The TOML document could not be parsed or had the wrong shape.
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quadrature or ODE refinement did not settle within tolerance.
    #[error("not converged: {0}")]
    Convergence(String),

    /// Fourier or grating-order truncation is too small for the requested accuracy.
    #[error("truncation insufficient: {0}")]
    Truncation(String),

    #[error("oracle grid aliasing: {0}")]
    Aliasing(String),

    /// Inertial phases requested both per velocity and lumped.
    #[error("channel mode conflict: {0}")]
    ModeConflict(String),

    #[error("unphysical pattern: {0}")]
    UnphysicalPattern(String),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
