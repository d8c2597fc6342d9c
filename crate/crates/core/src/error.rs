use std::path::PathBuf;

/// Errors raised across the feature-vector pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("record {0:?} has no text in title or abstract")]
    EmptyRecord(String),

    #[error("cannot stem {0:?}: only lowercase ASCII letters are accepted")]
    NonAlphabetic(String),

    #[error("lexicon would be empty: no document contains any token")]
    EmptyLexicon,

    #[error("term {0:?} is not in the lexicon")]
    UnknownTerm(String),

    #[error("unknown document id {0:?}")]
    UnknownDocument(String),

    #[error("term index {index} out of range for vocabulary of size {vocab}")]
    IndexOutOfRange { index: usize, vocab: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sequence of length {found} is shorter than the required {needed}")]
    TooShort { needed: usize, found: usize },

    #[error("cosine similarity is undefined for an all-zero vector")]
    ZeroVector,

    #[error("weighted Jaccard needs non-negative entries, found {value} at position {index}; extract features with relu activation")]
    NegativeEntry { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model format: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
