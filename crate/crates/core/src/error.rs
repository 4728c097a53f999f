use std::io;

use thiserror::Error;

/// Errors produced by the simulator, the oracles, and the learning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or matrix dimensions do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The exhaustive search space exceeds the configured candidate cap.
    #[error("search space of {candidates} candidates exceeds the oracle budget of {budget}; reduce M, K0 or q")]
    BudgetExceeded { candidates: u128, budget: u64 },

    /// Label encoding only supports one-bit phase resolution.
    #[error("unsupported phase resolution: q = {0} (labels require q = 1)")]
    UnsupportedResolution(u32),

    #[error("empty batch")]
    EmptyBatch,

    /// Inference was requested without the training-split feature normalization.
    #[error("feature normalization missing; refusing to run inference on unscaled inputs")]
    MissingNormalization,

    #[error("checkpoint version mismatch: expected `{expected}`, found `{found}`")]
    Version { expected: String, found: String },

    /// A text file (checkpoint, dataset, realization, config) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn parse(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}
