use thiserror::Error;

/// Errors raised by the denoising pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix columns are not orthonormal (max |W'W - I| = {0:e})")]
    NotOrthonormal(f64),

    #[error("requested rank {requested} exceeds the available dimension {available}")]
    RankTooLarge { requested: usize, available: usize },

    #[error("thresholded iterate has rank {found}, expected {expected}")]
    RankCollapse { expected: usize, found: usize },

    #[error("screened matrix has rank {found}, requested {requested}")]
    InitRankDeficient { requested: usize, found: usize },

    #[error("screening kept {rows} rows and {cols} columns; cannot fit a positive rank")]
    EmptyScreen { rows: usize, cols: usize },

    #[error("noise level estimate is zero (constant input?)")]
    DegenerateNoise,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
