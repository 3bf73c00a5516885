use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    #[error("register of {n_qubits} qubits exceeds the limit of {limit}")]
    RegisterTooLarge { n_qubits: usize, limit: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("observable must contain only I/Z strings, found {0}")]
    NotDiagonal(String),

    #[error("invalid integrals: {0}")]
    InvalidIntegrals(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty symmetry sector (n_elec={n_elec}, 2Sz={sz2})")]
    EmptySector { n_elec: usize, sz2: i32 },

    #[error("state tracking failed at step {step}: best overlap {overlap:.3} below 0.5 (grid too sparse)")]
    GridTooSparse { step: usize, overlap: f64 },

    #[error("target {0} crosses an avoided crossing on the requested range")]
    AvoidedCrossing(String),

    #[error("unknown target {0}")]
    UnknownTarget(String),

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize, params: Vec<f64> },

    #[error("kernel matrix not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("solver did not converge within {iterations} iterations (violation {violation:e})")]
    NoConvergence { iterations: usize, violation: f64 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
