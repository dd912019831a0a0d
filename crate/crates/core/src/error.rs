use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("depth error: {0}")]
    Depth(String),

    #[error("schedule diverges: {0}")]
    Divergent(String),

    #[error("endpoints not strictly short: |b - a| = {0} >= 1")]
    NotStrictlyShort(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("representation error: {0}")]
    Representation(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
