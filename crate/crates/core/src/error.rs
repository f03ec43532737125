use std::fmt;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// One rejected line of a lexicon file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Stream(#[from] io::Error),

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: duplicate phoneme symbol {symbol:?}")]
    DuplicatePhoneme { line: usize, symbol: String },

    #[error("no phonemes defined")]
    NoPhonemes,

    #[error("feature universe has {count} features (with beg/end), limit is {limit}")]
    TooManyFeatures { count: usize, limit: usize },

    #[error("jaccard similarity of two empty feature sets is undefined")]
    EmptyFeatureSets,

    #[error("{bad} of {total} lexicon lines rejected (limit 0.1%); first: {}", .errors.first().map(ToString::to_string).unwrap_or_default())]
    TooManyBadLines {
        bad: usize,
        total: usize,
        errors: Vec<LineError>,
    },

    #[error("unknown phoneme {0:?}")]
    UnknownPhoneme(String),

    #[error("empty pronunciation")]
    EmptyPronunciation,

    #[error("unknown word {0:?}")]
    UnknownWord(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged: non-finite loss at step {step}")]
    Diverged { step: usize },

    #[error("embedding file: {0}")]
    EmbeddingFormat(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("{0}")]
    Statistics(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure was caused by bad user input (as opposed to an
    /// internal fault). The CLI maps this onto its exit code.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Stream(_) | Error::Diverged { .. })
    }
}
