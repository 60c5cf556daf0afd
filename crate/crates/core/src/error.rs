use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(&'static str),

    #[error("{what} has eigenvalue {eigenvalue:e} below the round-off floor {floor:e}")]
    NotPsd { what: &'static str, eigenvalue: f64, floor: f64 },

    #[error("rate budget {0} is not positive")]
    NonPositiveRate(f64),

    #[error("compression solver did not converge: {0}")]
    Solver(String),

    #[error("interference-plus-noise term of user {user} is {value:e}, must be positive")]
    DegenerateInterference { user: usize, value: f64 },

    #[error("{failed} of {trials} trials failed for strategy {strategy}: {first}")]
    FailureThreshold { strategy: String, failed: usize, trials: usize, first: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
