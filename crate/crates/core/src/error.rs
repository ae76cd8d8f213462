use thiserror::Error;

use crate::rational::MeasureInterval;

#[derive(Debug, Error, Clone)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precision exhausted: {msg} (best interval {best})")]
    Precision { msg: String, best: MeasureInterval },
    #[error("search budget exhausted: {0}")]
    Budget(String),
    #[error("rule violation: {0}")]
    Rule(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
