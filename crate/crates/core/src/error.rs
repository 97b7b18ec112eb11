use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid membership function [{a}, {b}, {c}, {d}]: {reason}")]
    InvalidMembership {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        reason: &'static str,
    },

    #[error("invalid rule base: {0}")]
    InvalidRuleBase(String),

    #[error("{path}:{line}: {message}")]
    MalformedTrace { path: PathBuf, line: u64, message: String },

    #[error("{0}: no usable trace data after filtering")]
    EmptyDataset(PathBuf),

    #[error("{path}:{line}: {message}")]
    MalformedTable { path: PathBuf, line: u64, message: String },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    InvalidConfig(Vec<String>),

    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
