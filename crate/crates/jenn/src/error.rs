use thiserror::Error;

/// Errors surfaced by dataset construction, propagation, and training.
#[derive(Debug, Error)]
pub enum JennError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value in {context} at {location}")]
    NonFinite { context: String, location: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training diverged: cost became non-finite at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, JennError>;
