use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("truncation too small: {0}")]
    Truncation(String),

    #[error("operator is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("singular linear system (estimated null-space multiplicity {multiplicity})")]
    Singular { multiplicity: usize },

    #[error("steady state residual {residual:.3e} above tolerance {tol:.1e}")]
    Residual { residual: f64, tol: f64 },

    #[error("integrator step underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("fit did not converge: {0}")]
    FitFailed(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("at grid point {index} ({value}): {source}")]
    AtPoint { index: usize, value: f64, source: Box<Error> },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn at(index: usize, value: f64, e: Error) -> Error {
        Error::AtPoint { index, value, source: Box::new(e) }
    }
}
