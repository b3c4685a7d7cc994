use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated an operation's domain (precondition failure).
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed to converge or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Orbit enumeration hit its memory budget.
    #[error("orbit ball truncated: budget exhausted, complete to radius {completed_radius}")]
    Truncated { completed_radius: f64 },
    /// Quadrature did not converge within the halving budget.
    #[error("quadrature did not converge after {halvings} halvings (residual {residual:e})")]
    Quadrature { halvings: u32, residual: f64 },
    /// Invalid configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
