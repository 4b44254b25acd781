use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("phrase has no tokens")]
    EmptyPhrase,

    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: duplicate concept id `{id}`")]
    DuplicateId { id: String, line: usize },

    #[error("line {line}: unknown concept id `{id}`")]
    UnknownConcept { id: String, line: usize },

    #[error("dimension mismatch: expected {expected}, found {found} (line {line})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        line: usize,
    },

    #[error("every token of the phrase is out of vocabulary")]
    AllTokensOov,

    #[error("out-of-vocabulary token `{0}`")]
    OovToken(String),

    #[error("zero-norm vector has no cosine")]
    ZeroVector,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("concept dictionary is empty")]
    EmptyDictionary,

    #[error("no translation hypotheses to rank with")]
    NoHypotheses,

    #[error("alignment link ({source_index}, {target_index}) out of bounds for a {source_len}x{target_len} pair")]
    IndexOutOfBounds {
        source_index: usize,
        target_index: usize,
        source_len: usize,
        target_len: usize,
    },

    #[error("cannot split {n} items into {k} folds")]
    TooFewItems { n: usize, k: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(line: usize, reason: impl Into<String>) -> Self {
        Error::MalformedLine {
            line,
            reason: reason.into(),
        }
    }
}
