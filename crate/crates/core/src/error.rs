use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid dimension: {0}")]
    InvalidDimension(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("singular inversion: {0}")]
    SingularInversion(String),
    #[error("degenerate mode: {0}")]
    DegenerateMode(String),
    #[error("eigensolver did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("CFL violation: dt = {dt:.3e} exceeds limit {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },
    #[error("vacuum: minimum density {0:.3e} fell below the positivity guard")]
    Vacuum(f64),
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("positivity failure: {0}")]
    Positivity(String),
    #[error("scaling regime violates m/2 > n >= 1, alpha > 0: {0}")]
    Regime(String),
    #[error("time grid mismatch: {0}")]
    TimeGridMismatch(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
