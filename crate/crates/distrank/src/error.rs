//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A Gaussian score violated its invariants (non-finite mean, or
    /// confidence outside the supported range).
    #[error("invalid score: mu={mu}, confidence={confidence} (confidence must be finite and in [{min}, {max}])",
        min = crate::loss::MIN_CONFIDENCE, max = crate::loss::MAX_CONFIDENCE)]
    InvalidScore { mu: f64, confidence: f64 },

    /// A pair referenced an item index outside the score/item list.
    #[error("item index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    /// An ordinal relation other than -1 or +1 (equality relations are
    /// rejected; the loss has no term for them).
    #[error("unsupported ordinal relation {value}{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    UnsupportedRelation { value: i8, line: Option<usize> },

    /// A metric could not be computed from its inputs (zero total weight,
    /// empty bins, ...).
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    /// Min-max normalization over an all-equal collection.
    #[error("degenerate normalization: all score differences are identical")]
    DegenerateNormalization,

    /// A train/test split left one side without any usable pair.
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Feature vector length does not match the scorer.
    #[error("shape mismatch: expected feature dimension {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    /// A non-finite gradient was produced; training cannot continue.
    #[error("non-finite gradient encountered{}", detail.as_deref().map(|d| format!(": {d}")).unwrap_or_default())]
    NonFiniteGradient { detail: Option<String> },

    /// A dataset file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Checkpoint file rejected (wrong version or inconsistent contents).
    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
