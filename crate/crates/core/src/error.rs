use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulation, fitting and landscape layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("basis dimension {dim} exceeds the configured cap of {cap}")]
    BasisTooLarge { dim: usize, cap: usize },

    #[error("propagation failed: {0}")]
    Propagation(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("spectrum is not area-normalized (area = {area})")]
    NotNormalized { area: f64 },

    #[error("{source_name}:{line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("spectrum has {0} points, at least 10 are required")]
    TooFewPoints(usize),

    #[error("frequency grid does not overlap the data support")]
    NoSupport,

    #[error("training set: {0}")]
    Training(String),

    #[error("kernel factorization failed: {0}")]
    Factorization(String),

    #[error("point outside parameter bounds: {0}")]
    OutOfBounds(String),

    #[error("grid has {nodes} nodes, above the cap of {cap}")]
    GridTooLarge { nodes: usize, cap: usize },

    #[error("config `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::BasisTooLarge { .. }
                | Error::Parse { .. }
                | Error::TooFewPoints(_)
                | Error::NoSupport
                | Error::OutOfBounds(_)
                | Error::GridTooLarge { .. }
                | Error::Config { .. }
                | Error::Manifest(_)
                | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
