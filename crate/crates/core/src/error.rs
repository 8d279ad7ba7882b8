use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate variance forecast before {date}: forecast is zero but the return is {ret}")]
    DegenerateVariance { date: NaiveDate, ret: f64 },

    /// `var(eps^2)` of a Student distribution diverges for `nu <= 4`.
    #[error("Student distribution with nu = {nu} has no finite fourth moment (nu must exceed 4)")]
    Singularity { nu: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
