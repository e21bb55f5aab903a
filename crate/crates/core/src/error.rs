//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by memory, embedding, policy, environment and harness
/// operations.
#[derive(Debug, Error)]
pub enum CecError {
    #[error("{context}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{context}: non-finite component rejected")]
    NonFinite { context: &'static str },

    #[error(
        "random projection must reduce dimension: output_dim {output_dim} > input_dim {input_dim}"
    )]
    ProjectionMustReduce { input_dim: usize, output_dim: usize },

    #[error("unknown environment `{0}` (expected growing_tree, sparse_mountain_car, umaze or four_rooms)")]
    UnknownEnv(String),

    #[error("unknown config key `{0}`")]
    UnknownConfigKey(String),

    #[error("malformed value `{value}` for config key `{key}`")]
    MalformedConfigValue { key: String, value: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("snapshot line {line}: {reason}")]
    SnapshotFormat { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CecError>;
