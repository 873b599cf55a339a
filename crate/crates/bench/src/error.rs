use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{algo} output differs from the reference sort at index {index}")]
    VerificationFailed { algo: String, index: usize },
    #[error("walkthrough value {name} is {got}, expected {expected}")]
    GoldenMismatch {
        name: &'static str,
        got: String,
        expected: String,
    },
    #[error("malformed key file: {0}")]
    KeyFile(String),
    #[error(transparent)]
    Core(#[from] fusion_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
