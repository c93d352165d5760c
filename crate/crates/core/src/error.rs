use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate box: linear dimension is zero")]
    DegenerateBox,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("labels contain a single class; AUC is undefined")]
    SingleClass,

    #[error("all scores are equal; 2-means clustering is undefined")]
    DegenerateScores,

    #[error("stratification infeasible: {0}")]
    Infeasible(String),

    #[error("malformed model file: {0}")]
    Format(String),

    #[error("unsupported model version {found} (expected {expected})")]
    Version { expected: u32, found: String },

    #[error("model checksum mismatch")]
    Checksum,

    #[error("tree invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
