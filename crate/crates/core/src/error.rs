use thiserror::Error;

/// Errors produced by the `ttvqe` library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count must be at least {min}, got {got}")]
    TooFewQubits { min: usize, got: usize },

    #[error("dense representation is capped at {cap} qubits, got {got}")]
    TooManyQubits { cap: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },

    #[error("qubit index {index} out of range 1..={n}")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("parameter index {index} out of range 1..={count}")]
    ParameterOutOfRange { index: usize, count: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid Pauli string: {0}")]
    InvalidPauli(String),

    #[error("depolarizing parameter must lie in [0, 1], got {0}")]
    InvalidLambda(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("no fixture or dense oracle available: {0}")]
    NoExactEnergy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
