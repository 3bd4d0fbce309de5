use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("line {line}: unrecognized sentiment {value:?}")]
    Sentiment { line: usize, value: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("curated dictionary places {word:?} in more than one cluster ({first:?} and {second:?})")]
    CuratedConflict {
        word: String,
        first: String,
        second: String,
    },

    /// A computation would exceed its memory budget. Rendered as `KC` in result tables.
    #[error("resource limit exceeded: {needed} bytes needed, budget is {budget} bytes")]
    ResourceExhausted { needed: u128, budget: u128 },

    #[error("unknown grid {name:?}; available grids: {available}")]
    UnknownGrid { name: String, available: String },

    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceExhausted { .. })
    }
}
