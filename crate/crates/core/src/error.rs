use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    Kernel(String),
    #[error("invalid operator: {0}")]
    Operator(String),
    #[error("grid mismatch: {0}")]
    Grid(String),
    #[error("step size violates the stability bound: dt^2 * lambda_max * alpha = {0} >= 4")]
    Cfl(f64),
    #[error("missing samples: {0}")]
    MissingSamples(String),
    #[error("non-finite value at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 1 for numerical failures, 2 for bad configuration or input.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::NonFinite { .. } | Error::NoConvergence(_) => 1,
            _ => 2,
        }
    }
}
