//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A variable has zero spread (max == min), so scaling and the
    /// within-std accuracy criterion are undefined for it.
    #[error("variable {name:?} is degenerate: max == min == {value}")]
    DegenerateVariable { name: String, value: f64 },

    /// A variable has fewer than two non-missing entries.
    #[error("variable {name:?} has only {count} non-missing entries; need at least 2")]
    TooFewSamples { name: String, count: usize },

    /// A field failed to parse as a value of its column type.
    #[error("row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    /// A row does not have the expected number of columns.
    #[error("row {row}: expected {expected} columns, found {found}")]
    Schema {
        row: usize,
        expected: usize,
        found: usize,
    },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A configuration value violates its documented invariant.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An operation that requires a complete record saw a masked value.
    #[error("record {id:?} has missing values")]
    IncompleteRecord { id: String },

    /// A record that must carry a condition label does not.
    #[error("record {id:?} has no label")]
    MissingLabel { id: String },

    /// Requested number of missing variables is outside the valid range.
    #[error("k = {k} is out of range (max {max})")]
    InvalidK { k: usize, max: usize },

    /// Vector or layer dimensions do not line up.
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    /// An operation over a batch of patterns received an empty batch.
    #[error("empty batch")]
    EmptyBatch,

    /// Training loss became NaN or infinite (divergent step size).
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    /// A serialized network or model file is malformed.
    #[error("model format error: {0}")]
    ModelFormat(String),

    /// Training data contains masked values or is otherwise unusable.
    #[error("incomplete training data: {0}")]
    IncompleteTrainingData(String),

    /// Every position of the record is masked, so there are no known
    /// components to score against.
    #[error("record has no known components")]
    AllMissing,

    /// All probe pairs were degenerate (coincident points).
    #[error("no valid pairs to probe")]
    NoValidPairs,

    /// Selection was asked to draw from an empty population.
    #[error("empty population")]
    EmptyPopulation,

    /// The optimizer was given a zero evaluation budget.
    #[error("optimizer budget is zero")]
    BudgetZero,

    /// The record width does not match the model width.
    #[error("record width {record_width} does not match model width {model_width}")]
    ModelMismatch {
        model_width: usize,
        record_width: usize,
    },

    /// Exhaustive grid search only supports one or two missing variables.
    #[error("{count} missing variables exceed the grid oracle limit of {max}")]
    TooManyMissing { count: usize, max: usize },

    /// Grid spacing outside (0, 0.5].
    #[error("grid step {0} is outside (0, 0.5]")]
    InvalidStep(f64),

    /// Classifier training data contains only one class.
    #[error("training data contains a single class")]
    SingleClassData,

    /// A sweep step needs a model that is neither provided nor trainable.
    #[error("missing model: {0}")]
    MissingModel(String),

    /// A comparison needs results for an optimizer the report lacks.
    #[error("report has no rows for optimizer {0}")]
    MissingOptimizer(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
