use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("table {0} has no rows")]
    EmptyTable(String),

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("N-Triples parse error at line {line}: {message}")]
    NTriples { line: usize, message: String },

    #[error("subclass cycle involving {0}")]
    SubclassCycle(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index directory {path}: {message}")]
    Index { path: PathBuf, message: String },

    #[error("lookup service {service} failed: {message}")]
    Service { service: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input data rather than by how the
    /// program was invoked.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Config(_))
    }
}
