use thiserror::Error;

use crate::grid::Cube;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at lattice index {index}")]
    NonFinite { index: usize },

    #[error("cube {cube:?} does not fit inside the grid")]
    CubeOutOfBounds { cube: Cube },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice point {index} is not covered by any cube of the family")]
    UncoveredPoint { index: usize },

    #[error("weight must be strictly positive (value {value} at index {index})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("the tripled cube of {cube:?} leaves the domain")]
    DilateOutOfDomain { cube: Cube },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("{skipped} of {total} ratio terms had a vanishing denominator")]
    TooManySkipped { skipped: usize, total: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
