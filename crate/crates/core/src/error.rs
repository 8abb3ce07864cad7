use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnotVector(String),
    #[error("parameter {0} outside [0,1]")]
    Domain(f64),
    #[error("weight vector has length {got}, expected {expected}")]
    WeightMismatch { expected: usize, got: usize },
    #[error("iteration did not converge (residual {residual:e})")]
    Iteration { residual: f64 },
    #[error("knot {knot} would reach multiplicity {mult} (max {max})")]
    MultiplicityOverflow { knot: f64, mult: usize, max: usize },
    #[error("singular metric at s = ({0}, {1})")]
    SingularMetric(f64, f64),
    #[error("matrix is not orthogonal (deviation {0:e})")]
    NonOrthogonal(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("trial space lacks smoothness: {0}")]
    InsufficientSmoothness(String),
    #[error("numerically singular matrix (cond ~ {cond:e})")]
    SingularMatrix { cond: f64 },
    #[error("fixed point diverged after {iterations} iterations (last increment {last:e})")]
    Divergence { iterations: usize, last: f64, increments: Vec<f64> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
