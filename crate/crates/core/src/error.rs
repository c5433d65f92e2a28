use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown entity `{name}`")]
    UnknownEntity { line: usize, name: String },

    #[error("line {line}: unknown relation `{name}`")]
    UnknownRelation { line: usize, name: String },

    #[error("entity id {0} is out of range")]
    EntityOutOfRange(u32),

    #[error("relation id {0} is out of range")]
    RelationOutOfRange(u32),

    #[error("relation `{0}` already ends with the inverse suffix `^-`")]
    AmbiguousInverseName(String),

    #[error("graph already has synthesized inverse relations")]
    AlreadyClosed,

    #[error("graph has no edges")]
    NoEdges,

    #[error("no random walk of length {0} completed after {1} attempts")]
    WalkExhausted(usize, usize),

    #[error("training graph is not a subset of the full graph: {0}")]
    NotSubset(String),

    #[error("graphs do not share entity and relation tables")]
    TableMismatch,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("query has no candidate answers")]
    NoCandidates,

    #[error("operation requires a bilinear model, got {0}")]
    WrongModelKind(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("empty example set")]
    NoExamples,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
