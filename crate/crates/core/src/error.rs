use thiserror::Error;

use crate::scenario::{Chain, ValidationReport};

/// Errors surfaced by the exact and numeric layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid correlation table: {0}")]
    Validation(ValidationReport),

    #[error("six parameters violate positivity chain(s) {0:?}")]
    ChainViolation(Vec<Chain>),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid statistics: {0}")]
    InvalidStats(String),

    #[error("joint outcome space has {size} points, limit is {limit}")]
    TooLarge { size: u128, limit: u128 },

    #[error("invalid ontological model: {0}")]
    InvalidModel(String),

    #[error("model is not factorizable: ontic state {state}, context {context}")]
    NotFactorizable { state: usize, context: usize },

    #[error("invalid pairwise response decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid quantum object: {0}")]
    InvalidQuantum(String),

    #[error("joint POVMs disagree on measurement M{measurement} by {deviation:e}")]
    MarginalMismatch { measurement: usize, deviation: f64 },

    #[error("measurements are not jointly measurable (best margin {margin:e})")]
    NotJointlyMeasurable { margin: f64 },

    #[error("conic solver stalled after {iterations} iterations")]
    SolverStall { iterations: usize },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
