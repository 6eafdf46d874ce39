use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("register label collision: {0:?}")]
    LabelCollision(String),

    #[error("unknown register: {0:?}")]
    UnknownRegister(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    /// Tracked dimension or enumeration size exceeded the configured cap.
    #[error("infeasible size: {0}")]
    Infeasible(String),

    #[error("malformed spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
