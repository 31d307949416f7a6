use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the comparison pipeline, the generators and image IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("image aspect ratios differ: {cols1}x{rows1} vs {cols2}x{rows2}")]
    AspectMismatch {
        rows1: usize,
        cols1: usize,
        rows2: usize,
        cols2: usize,
    },

    #[error("image dimensions differ: {rows1}x{cols1} vs {rows2}x{cols2}")]
    DimensionMismatch {
        rows1: usize,
        cols1: usize,
        rows2: usize,
        cols2: usize,
    },

    #[error("image has no background cell, distance transform is undefined")]
    AllForeground,

    #[error("image {rows}x{cols} is smaller than the required {min}x{min}")]
    TooSmall { rows: usize, cols: usize, min: usize },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("image file {0} has no pixels")]
    EmptyImage(PathBuf),

    #[error("cannot write {path}: {reason}")]
    WriteFailure { path: PathBuf, reason: String },

    #[error("objects do not fit in the frame: {0}")]
    DoesNotFit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown metric {0:?} (expected pointssim, mse, ssim or msssim)")]
    UnknownMetric(String),
}

impl Error {
    /// Stable identifier used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AspectMismatch { .. } => "AspectMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::AllForeground => "AllForeground",
            Error::TooSmall { .. } => "TooSmall",
            Error::InvalidImage(_) => "InvalidImage",
            Error::UnreadableFile { .. } => "UnreadableFile",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::EmptyImage(_) => "EmptyImage",
            Error::WriteFailure { .. } => "WriteFailure",
            Error::DoesNotFit(_) => "DoesNotFit",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::UnknownMetric(_) => "UnknownMetric",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
