use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record could not be parsed. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate id {id:?} (line {line})")]
    DuplicateId { id: String, line: usize },

    #[error("id {0:?} appears in both the seed and the input dataset")]
    IdCollision(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("hypothesis-only prediction requested but instance {0:?} has no prediction source")]
    MissingPrediction(String),

    #[error("instance {0:?} has no model probabilities and no model was supplied")]
    MissingProbabilities(String),

    #[error("z-statistic undefined for n = 0")]
    EmptySupport,

    #[error("cannot train on an empty dataset")]
    EmptyDataset,

    #[error("instance {0:?} contains no biased feature for its label")]
    NotRejected(String),

    #[error("marker {0:?} collides with the vocabulary or another marker")]
    MarkerCollision(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
