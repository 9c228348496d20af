use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },

    #[error("matrix is asymmetric at ({row}, {col}): |difference| = {difference:e}")]
    AsymmetricMatrix { row: usize, col: usize, difference: f64 },

    #[error("nonzero diagonal entry at index {index}")]
    NonzeroDiagonal { index: usize },

    #[error("negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("label sets do not match: {0}")]
    LabelMismatch(String),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),

    #[error("empty input")]
    EmptyInput,

    #[error("weight at position {index} is not positive")]
    NonpositiveWeight { index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("input vector is constant (zero variance)")]
    ConstantInput,

    #[error("fold {fold} receives fewer than one sample")]
    FoldTooSmall { fold: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("{groups} groups cannot be split into {folds} equal folds")]
    IndivisibleGroups { groups: usize, folds: usize },

    #[error("unequal replicate counts: group `{group}` has {found} rows, expected {expected}")]
    UnequalReplicates {
        group: String,
        expected: usize,
        found: usize,
    },

    #[error("block size {block} is invalid for a {width}x{height} image")]
    InvalidBlockSize { block: usize, width: usize, height: usize },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(PathBuf),

    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("non-negative least squares did not converge within {0} iterations")]
    NnlsIterationLimit(usize),

    #[error("I/O error on {path}: {source}")]
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

    /// True for failures caused by the inputs themselves rather than by the
    /// environment (file system, image decoding).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Decode { .. })
    }
}
