use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The three-photon closed form was evaluated inside the guard band around its pole.
    #[error("three-photon amplitude singular: omega = {omega} rad/s is within {guard} rad/s of nu1 = {nu1} rad/s")]
    Singularity { omega: f64, nu1: f64, guard: f64 },

    /// The adaptive integrator could not make progress.
    #[error("integration failed at t = {t:e} s: {reason}")]
    Integration { t: f64, reason: String },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: estimated error {estimate:e} > target {target:e}")]
    Quadrature { estimate: f64, target: f64 },

    /// The tabulation grid for nested integrals would be too large.
    #[error("quadrature grid of {required} points exceeds the limit of {limit}")]
    GridTooLarge { required: usize, limit: usize },

    /// Configuration failed validation; `key` names the offending entry.
    #[error("invalid config value for `{key}`: {message}")]
    Config { key: String, message: String },

    /// The configuration document could not be parsed.
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// True for failures of numerical routines (integration, quadrature, poles).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singularity { .. }
                | Error::Integration { .. }
                | Error::Quadrature { .. }
                | Error::GridTooLarge { .. }
                | Error::Domain(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
