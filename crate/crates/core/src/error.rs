use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function table: {0}")]
    InvalidTable(String),

    #[error("state {value} outside sampled range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("function is not nondecreasing: {0}")]
    NotMonotone(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical instability at step {step}: {detail}")]
    Unstable { step: usize, detail: String },

    #[error("test function support violation: {0}")]
    Support(String),

    #[error("k ∈ H: k = {k} lies in a flat region of A")]
    KInH { k: f64 },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cost guard: {0}")]
    CostGuard(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
