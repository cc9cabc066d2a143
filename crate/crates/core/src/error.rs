//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by the quality-index pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to decode video {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("video contains no frames: {0}")]
    EmptyVideo(PathBuf),

    #[error("frame too small ({width}x{height}), minimum is {min}x{min}")]
    FrameTooSmall { width: usize, height: usize, min: usize },

    #[error("{context}: expected shape {expected}, got {actual}")]
    Shape {
        context: String,
        expected: String,
        actual: String,
    },

    #[error("prompt does not fit the context window ({tokens} tokens, limit {limit})")]
    PromptTooLong { tokens: usize, limit: usize },

    #[error("empty description is not a valid prompt")]
    EmptyDescription,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("at least {required} frames required, got {actual}")]
    InsufficientFrames { required: usize, actual: usize },

    #[error("normalization stats for `{0}` are missing; run the `stats` command first")]
    MissingStats(String),

    #[error("feature cache miss for {0}")]
    CacheMiss(String),

    #[error("invalid aggregation mode `{0}`")]
    InvalidMode(String),

    #[error("dataset manifest error: {0}")]
    Manifest(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("weight file error: {0}")]
    Weights(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
