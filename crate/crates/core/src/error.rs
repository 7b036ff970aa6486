use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AanError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("phase {phase} outside [0, 2π)")]
    PhaseDomain { phase: f64 },

    #[error("basis vector is identically zero; projection undefined")]
    SingularBasis,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config has {} violation(s):\n  - {}", .0.len(), .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AanError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AanError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, AanError>;
