use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("label out of range at line {line}: got {label}, expected 0..=4")]
    LabelOutOfRange { line: usize, label: i64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("feature dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("input length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("document index {index} out of range for query with {len} documents")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("need at least {required} queries, dataset has {actual}")]
    TooFewQueries { required: usize, actual: usize },

    #[error("split fractions must be positive and sum to 1, got ({0}, {1}, {2})")]
    BadFractions(f64, f64, f64),

    #[error("no evaluable queries (every query has zero ideal DCG)")]
    NoEvaluableQueries,

    #[error("paired samples must have equal length >= 2, got {left} and {right}")]
    BadPairedSamples { left: usize, right: usize },

    #[error("degenerate basis: sum of squared basis values is zero")]
    DegenerateBasis,

    #[error("all candidate features are degenerate on the training sample")]
    AllFeaturesDegenerate,

    #[error("empty training input")]
    EmptyTraining,

    #[error("non-finite weights at epoch {epoch}")]
    NonFiniteUpdate { epoch: usize },

    #[error("undefined cosine similarity: zero vector")]
    ZeroVector,

    #[error("seed query count {requested} exceeds available query count {available}")]
    SeedCountTooLarge { requested: usize, available: usize },

    #[error("seed set has {available} usable documents, need at least k = {k}")]
    TooFewSeedDocuments { k: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
