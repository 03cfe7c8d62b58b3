use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LadError {
    #[error("dataset is empty (n = {n}, p = {p})")]
    EmptyData { n: usize, p: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("non-finite response at row {row}")]
    NonFiniteResponse { row: usize },

    #[error("intercept column {col} is not all ones (row {row} holds {value})")]
    BadInterceptColumn { col: usize, row: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {found} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("input is empty")]
    EmptyInput,

    #[error("total weight is zero")]
    ZeroTotalWeight,

    #[error("invalid weight {value} at position {index}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("non-finite value at position {index}")]
    NonFiniteValue { index: usize },

    #[error("column has no entry above the zero threshold")]
    AllZeroColumn,

    #[error("linear system is singular")]
    SingularSystem,

    #[error("instance too large for exhaustive enumeration (n = {n}, p = {p})")]
    TooLarge { n: usize, p: usize },

    #[error("no nonsingular {p}-row subset exists")]
    RankDeficient { p: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("cannot parse column '{column}' at line {row}: {value:?} (offending lines: {bad_rows:?})")]
    ParseError {
        row: usize,
        column: String,
        value: String,
        bad_rows: Vec<usize>,
    },

    #[error("response column {0} not found")]
    MissingResponseColumn(String),

    #[error("no data rows")]
    NoRows,

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = LadError> = std::result::Result<T, E>;
