use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("circuit contains unexpanded macro gate `{0}`")]
    MacroNotExpanded(String),
    #[error("cannot compose circuits: {0}")]
    CompositionError(String),
    #[error("dimension mismatch: {0}")]
    DimensionError(String),
    #[error("invalid register: {0}")]
    InvalidRegister(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
