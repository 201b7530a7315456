use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("empty interval at component {index}: lo > hi")]
    EmptyBox { index: usize },
    #[error("point is on or outside the boundary at component {index}")]
    BoundaryPoint { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("objective fell below {floor:e}; problem appears unbounded")]
    ObjectiveUnbounded { floor: f64 },
    #[error("oracle failure: {0}")]
    OracleFailure(String),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
