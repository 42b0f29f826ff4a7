use thiserror::Error;

/// Errors raised by state construction, estimators and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("total dimension {requested} exceeds the configured cap {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("invalid subsystem dimensions: {0}")]
    InvalidDims(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (deviation {0:e})")]
    TraceNotOne(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("vector is not normalized (norm deviation {0:e})")]
    NotNormalized(f64),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("expected a pure state, purity is {purity}")]
    MixedInput { purity: f64 },

    #[error("ensemble size {size} is smaller than the state rank {rank}")]
    EnsembleTooSmall { size: usize, rank: usize },

    #[error("antisymmetric subspace of {n} parties with local dimension {d} is empty")]
    EmptyAntisymmetricSpace { d: usize, n: usize },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
