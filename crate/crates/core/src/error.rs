use thiserror::Error;

/// Errors produced anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rejection sampler exhausted its budget of {attempts} proposals after {accepted} acceptances")]
    SamplerExhausted { attempts: usize, accepted: usize },

    #[error("map produced a non-finite value at atom {index}")]
    NonFiniteMap { index: usize },

    #[error("transport solver failed: {0}")]
    Solver(String),

    #[error("dual potentials violate the Lipschitz constraint at ({i}, {j}): excess {excess:e}")]
    LipschitzViolation { i: usize, j: usize, excess: f64 },

    #[error("sinkhorn underflow: {0}")]
    Underflow(String),

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {err:e})")]
    Quadrature { tol: f64, err: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged after {steps} steps")]
    Diverged { steps: usize, trace: Vec<f64> },

    #[error("map is not strictly increasing: {0}")]
    NonMonotone(String),

    #[error("cdf inversion failed at p = {0}")]
    CdfInversion(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
