use thiserror::Error;

/// Errors produced by the jetsim pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time {t} is outside the domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("insufficient data: need at least {needed} samples, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dataset is not sufficiently informative (verdict: {0})")]
    NotInformative(String),

    #[error(
        "initial conditions are inconsistent with the data: residual {residual:e} exceeds {tol:e}"
    )]
    InconsistentInitialConditions { residual: f64, tol: f64 },

    #[error("coefficient matrix lost row rank at t = {t}: rank {rank} < {rows} rows")]
    RankDeficient { t: f64, rank: usize, rows: usize },

    #[error("implicit stage solve failed at t = {t}: residual {residual:e} exceeds {tol:e}")]
    StageFailure { t: f64, residual: f64, tol: f64 },

    #[error("model check failed: {0}")]
    Model(String),

    #[error("could not draw a valid system after {0} attempts")]
    RetriesExhausted(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
