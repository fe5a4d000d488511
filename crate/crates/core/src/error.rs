use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems found while parsing an embedding file. Every variant carries the
/// 1-based line number it was detected on.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingParseError {
    #[error("malformed header at line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("inconsistent vector length at line {line}: expected {expected}, found {found}")]
    InconsistentLength {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite component at line {line}")]
    NonFinite { line: usize },
    #[error("duplicate token {token:?} at line {line}")]
    DuplicateToken { line: usize, token: String },
    #[error("empty token at line {line}")]
    EmptyToken { line: usize },
    #[error("record count mismatch at line {line}: header declares {declared}, found {found}")]
    CountMismatch {
        line: usize,
        declared: usize,
        found: usize,
    },
}

impl EmbeddingParseError {
    pub fn line(&self) -> usize {
        match self {
            EmbeddingParseError::MalformedHeader { line, .. }
            | EmbeddingParseError::MalformedRecord { line, .. }
            | EmbeddingParseError::InconsistentLength { line, .. }
            | EmbeddingParseError::NonFinite { line }
            | EmbeddingParseError::DuplicateToken { line, .. }
            | EmbeddingParseError::EmptyToken { line }
            | EmbeddingParseError::CountMismatch { line, .. } => *line,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    EmbeddingParse(#[from] EmbeddingParseError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("missing field `{field}` in record {record}")]
    MissingField { record: usize, field: String },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("empty input file {}", .0.display())]
    EmptyFile(PathBuf),
    #[error("malformed record {record}: {reason}")]
    MalformedDocument { record: usize, reason: String },
    #[error("wordpiece vocabulary missing or empty")]
    WordpieceVocabMissing,
    #[error("seed word {0:?} is not in the embedding table")]
    SeedNotInTable(String),
    #[error("empty corpus for LDA")]
    EmptyLdaCorpus,
    #[error("empty vocabulary after preprocessing")]
    EmptyVocabulary,
    #[error("topic index {topic} out of range (num_topics = {num_topics})")]
    TopicOutOfRange { topic: usize, num_topics: usize },
    #[error("no usable tokens")]
    NoUsableTokens,
    #[error("document id {0:?} is not in the evaluated id set")]
    UnknownId(String),
    #[error("class {0} is empty")]
    EmptyClass(&'static str),
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 data, 4 search.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::SeedNotInTable(_) => 4,
            _ => 3,
        }
    }
}
