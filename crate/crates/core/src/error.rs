use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
///
/// Variants are grouped into three classes (configuration, data, numeric) so
/// the command-line front end can map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum ScauError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("non-finite sample in channel '{channel}' at index {index}")]
    NonFinite { channel: String, index: usize },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("design matrix is singular: condition number {condition:.3e} exceeds {threshold:.0e}")]
    Singular { condition: f64, threshold: f64 },

    #[error("unstable autoregressive system: spectral radius {radius:.6} >= 1")]
    Unstable { radius: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<ScauError>,
    },
}

/// Coarse error class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numeric => 4,
        }
    }
}

impl ScauError {
    pub fn config(msg: impl Into<String>) -> Self {
        ScauError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        ScauError::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        ScauError::Numeric(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ScauError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        ScauError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Wraps an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ ScauError::Stage { .. } => e,
            e => ScauError::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            ScauError::Config(_) => ErrorClass::Config,
            ScauError::Data(_)
            | ScauError::NonFinite { .. }
            | ScauError::Io { .. }
            | ScauError::Parse { .. } => ErrorClass::Data,
            ScauError::Numeric(_) | ScauError::Singular { .. } | ScauError::Unstable { .. } => {
                ErrorClass::Numeric
            }
            ScauError::Stage { source, .. } => source.class(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ScauError>;
