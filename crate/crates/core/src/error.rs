use thiserror::Error;

use crate::specfun::SpecFunError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid specification: {0}")]
    Spec(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
