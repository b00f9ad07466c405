use thiserror::Error;

use crate::oracle::OracleReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix must be square with dim >= 1 (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Hermitian eigensolver failed to converge")]
    EigenFailure,

    #[error("negative eigenvalue {value:e} below clipping window")]
    NegativeEigenvalue { value: f64 },

    #[error("trace {trace} differs from 1")]
    TraceNotOne { trace: f64 },

    #[error("rank {rank} out of range for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("operator basis is not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is not an orthogonal projector (deviation {deviation:e})")]
    NotProjector { deviation: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("outcome index {index} out of range ({outcomes} outcomes)")]
    OutcomeOutOfRange { index: usize, outcomes: usize },

    #[error("outcome {index} has probability {probability:e}, conditional state undefined")]
    ProbabilityBelowFloor { index: usize, probability: f64 },

    #[error("probability {value:e} for outcome {index} is negative beyond round-off")]
    NegativeProbability { index: usize, value: f64 },

    #[error("block {index} is not supported in its eigenspace (residual {residual:e})")]
    BlockOutsideEigenspace { index: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "minimality violated: search found distance {:.17e} against Lüders distance {:.17e}",
        .0.best_distance,
        .0.lueders_distance
    )]
    MinimalityViolation(Box<OracleReport>),
}
