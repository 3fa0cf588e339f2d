//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the casetwin toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("label column '{0}' not found in header")]
    MissingLabelColumn(String),

    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },

    #[error("row {row}, column '{column}': value '{value}' does not conform to declared kind {kind}")]
    ValueKindMismatch { row: usize, column: String, value: String, kind: String },

    #[error("non-numeric value '{value}' at row {row}, column {column}")]
    NonNumericValue { row: usize, column: usize, value: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("case {id} does not conform to schema: {reason}")]
    NonConformingCase { id: usize, reason: String },

    #[error("duplicate case id {0}")]
    DuplicateCaseId(usize),

    #[error("weight vector has length {got}, expected {expected}")]
    WeightLengthMismatch { expected: usize, got: usize },

    #[error("negative weight at index {0}")]
    NegativeWeight(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("layer {layer}: weight matrix is {got_rows}x{got_cols}, expected {rows}x{cols}")]
    LayerShapeMismatch { layer: usize, rows: usize, cols: usize, got_rows: usize, got_cols: usize },

    #[error("layer {layer}: bias vector has length {got}, expected {expected}")]
    BiasShapeMismatch { layer: usize, expected: usize, got: usize },

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("input has length {got}, model expects {expected}")]
    InputDimensionMismatch { expected: usize, got: usize },

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("operation requires a classification head")]
    NotClassification,

    #[error("operation requires a regression head")]
    NotRegression,

    #[error("retrieval index is empty after filtering")]
    EmptyIndex,

    #[error("no case with a predicted class different from the query's")]
    NoUnlikeNeighbor,

    #[error("no counterfactual exists: no explanation case and no unlike-class case")]
    NoCounterfactual,

    #[error("class '{0}' has no predicted members; statistics unusable")]
    ClassUnusable(String),

    #[error("query is already predicted in the target class; nothing to contrast")]
    AlreadyTargetClass,

    #[error("target class '{0}' has fewer than 2 members")]
    TooFewClassMembers(String),

    #[error("feature schemas do not match: {0}")]
    SchemaMismatch(String),

    #[error("holdout shares case ids with training variant '{variant}' ({count} overlapping)")]
    HoldoutOverlap { variant: String, count: usize },

    #[error("unknown class label '{0}'")]
    UnknownClassLabel(String),

    #[error("query index {index} out of range (dataset has {len} rows)")]
    QueryIndexOutOfRange { index: usize, len: usize },

    #[error("cannot augment: {0}")]
    CannotAugment(String),

    #[error("{0} requires numeric-only features")]
    NumericOnly(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
