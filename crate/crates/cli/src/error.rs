use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: trk_core::Error,
    },

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    pub fn model(context: impl Into<String>, source: trk_core::Error) -> Self {
        LabError::Model {
            context: context.into(),
            source,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 numeric or truncation, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        use trk_core::Error as E;
        match self {
            LabError::Config(_) => 2,
            LabError::Model { source, .. } => match source {
                E::Input(_) | E::Configuration(_) | E::Size { .. } => 2,
                E::Numeric(_) | E::Zone(_) | E::Dimension { .. } => 3,
            },
            LabError::Io { .. } => 4,
        }
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
