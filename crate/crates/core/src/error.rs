use std::path::PathBuf;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dataset is empty after loading and thresholding")]
    EmptyDataset,

    #[error("no users or items survive {k}-core filtering")]
    EmptyAfterKCore { k: usize },

    #[error("user {user} has {have} interactions, need at least {need} to split")]
    ProfileTooSmall {
        user: String,
        have: usize,
        need: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("item index {index} out of range for {n_items} items")]
    ItemIndexOutOfRange { index: usize, n_items: usize },

    #[error("unknown item keys: {}", .0.join(", "))]
    UnknownItemKeys(Vec<String>),

    #[error("non-finite loss at epoch {epoch}, batch {batch}; try a smaller learning rate")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("bad model file: {0}")]
    ModelFormat(String),

    #[error("artifacts are incompatible: item universe hash {got} does not match {expected}")]
    IncompatibleArtifacts { expected: String, got: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
