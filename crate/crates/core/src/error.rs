use std::io;

use thiserror::Error;

/// Errors produced by projection, training, and feature-file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("dense oracle too large: {0}")]
    OracleSize(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error("corrupt file: {0}")]
    Corruption(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("inconsistent data: {0}")]
    Consistency(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("cannot split: {0}")]
    Split(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable short name used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Parameter(_) => "parameter",
            Error::Input(_) => "input",
            Error::OracleSize(_) => "oracle-size",
            Error::Format(_) => "format",
            Error::Corruption(_) => "corruption",
            Error::Parse(_) => "parse",
            Error::Consistency(_) => "consistency",
            Error::InsufficientSamples(_) => "insufficient-samples",
            Error::Split(_) => "split",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
