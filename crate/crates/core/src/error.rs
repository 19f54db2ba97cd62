use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("sample contains no t-scores")]
    EmptySample,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "projection did not converge after {iterations} iterations \
         (best distance {best_distance:e}, kkt residual {residual:e})"
    )]
    NonConvergence {
        iterations: usize,
        best_distance: f64,
        residual: f64,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
