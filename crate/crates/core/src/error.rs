use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unsupported nilpotency step {0} (at most 3 is supported)")]
    UnsupportedStep(usize),
    #[error("exact arithmetic unavailable: {0}")]
    Inexact(String),
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("oracle error: {0}")]
    Oracle(String),
    #[error("solver did not converge: {0}")]
    Solver(String),
    #[error("sampling error: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
