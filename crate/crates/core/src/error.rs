use std::path::PathBuf;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", join(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("instance has {n_offline} offline nodes, exceeding the exact-DP limit of {limit}")]
    DpLimit { n_offline: usize, limit: usize },

    #[error("{what} supports at most {cap}, got {got}")]
    SizeCap { what: &'static str, cap: usize, got: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("instance has no embeddings")]
    MissingEmbeddings,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("policy `{policy}` returned {action} at online node {t}, which is not a legal action")]
    InvalidAction { policy: String, t: usize, action: String },

    #[error("inconsistent state: {0}")]
    InconsistentState(String),

    #[error("component with {size} offline nodes exceeds the DP limit {limit}")]
    OversizedComponent { size: usize, limit: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("malformed input file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
