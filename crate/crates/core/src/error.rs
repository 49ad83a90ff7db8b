use thiserror::Error;

use crate::witness::UndefinedGate;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("interval [{lo}..{hi}] is not a subinterval of [1..{n}]")]
    IntervalOutOfRange { lo: usize, hi: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("instance carries no origin data; uniqueness is undefined for it")]
    MissingOrigin,

    #[error("witness has an undefined gate: {0}")]
    Undefined(UndefinedGate),

    #[error("uncertified parameters: {0}")]
    Uncertified(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
