use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cost guard: {0}")]
    CostGuard(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("schedule infeasible: {0}")]
    Infeasible(String),
    #[error("layout error: {0}")]
    Layout(String),
    #[error("circuit error: {0}")]
    Circuit(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("stage {stage} failed (artifact {artifact}): {source}")]
    Stage {
        stage: String,
        artifact: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by invalid input rather than by the environment.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io { .. } => false,
            Error::Stage { source, .. } => source.is_validation(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(what: &str, err: serde_json::Error) -> Self {
        Error::Parse {
            context: format!("{what} line {} column {}", err.line(), err.column()),
            message: err.to_string(),
        }
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &std::path::Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
