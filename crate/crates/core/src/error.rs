use thiserror::Error;

use crate::matlib::Svd1;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("matrix has zero Frobenius norm")]
    ZeroMatrix,
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize, last: Box<Svd1> },
    #[error("factor collapsed to zero")]
    DegenerateFactor,
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),
    #[error("model is singular")]
    SingularModel,
    #[error("insufficient support: {have} positive weights, need {need}")]
    InsufficientSupport { have: usize, need: usize },
    #[error("hypothesis pool exhausted after {attempts} attempts")]
    PoolExhausted { attempts: usize },
    #[error("preference matrix has no nonzero active column")]
    EmptyPreference,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
