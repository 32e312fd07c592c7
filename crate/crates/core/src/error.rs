use thiserror::Error;

/// Errors raised by the analyses in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ill-conditioned rank decision: {0}")]
    IllConditioned(String),

    #[error("partial fixed-point integrals are not strictly convergent (test element #{generator}, last increment {increment:e})")]
    NotStrictlyConvergent { generator: usize, increment: f64 },

    #[error("inconsistent action: {0}")]
    InconsistentAction(String),

    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("rank deficiency at grid point {point:?}: minimal fiber eigenvalue {min_eigenvalue:e}")]
    RankDeficient {
        point: Vec<usize>,
        min_eigenvalue: f64,
    },

    #[error("fiber algebra is not full at grid point {point:?}: dimension {dimension}")]
    NotFull { point: Vec<usize>, dimension: usize },

    #[error("winding number is ambiguous: phase jump {jump:.4} between samples {index} and {next}")]
    Resolution {
        index: usize,
        next: usize,
        jump: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
