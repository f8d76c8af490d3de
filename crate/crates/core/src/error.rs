use crate::corpus::RefId;

/// Specialized result type used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by corpus ingestion, training, scoring, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("last name is empty after normalization")]
    EmptyLastName,

    #[error("duplicate citation id: {0}")]
    DuplicateCitationId(String),

    #[error("citation {0} has no authors")]
    NoAuthors(String),

    #[error("unknown reference: {0}")]
    UnknownReference(RefId),

    #[error("references are in different blocks: {a} is in '{key_a}', {b} is in '{key_b}'")]
    BlockMismatch {
        a: RefId,
        key_a: String,
        b: RefId,
        key_b: String,
    },

    #[error("cannot compare a reference with itself: {0}")]
    SelfPair(RefId),

    #[error("{0}")]
    OutOfRange(String),

    #[error("need at least two blocks to sample non-match pairs")]
    InsufficientBlocks,

    #[error("training set is empty: {0}")]
    EmptyTrainingSet(&'static str),

    #[error("profile schema version {profile} does not match model schema version {model}")]
    SchemaMismatch { model: u32, profile: u32 },

    #[error("{0}")]
    DomainError(String),

    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersionUnsupported { found: u64, expected: u64 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("reference sets differ between partitions: {0}")]
    ReferenceSetMismatch(String),

    #[error("cannot evaluate an empty reference set")]
    EmptyInput,

    #[error("invalid reference id '{0}': expected '<citation id>#<author position>'")]
    InvalidRefId(String),

    #[error("line {line}: {message}")]
    InvalidRecord { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}
