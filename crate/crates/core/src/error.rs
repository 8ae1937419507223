//! Error type shared across the crate.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field evaluation point within {limit_um} um of a wire segment centerline")]
    Singularity { limit_um: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("calibration failed: {0}")]
    CalibrationFailed(String),

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("parse error in {path}: {message} at byte offset {offset}")]
    Parse {
        path: PathBuf,
        message: String,
        offset: u64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CalibrationFailed(_) => 2,
            Error::Mismatch(_) => 3,
            _ => 1,
        }
    }
}
