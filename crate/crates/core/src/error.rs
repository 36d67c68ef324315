use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{}: unsupported image format ({detail})", path.display())]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("colour space mismatch: expected {expected}, found {found}")]
    SpaceMismatch {
        expected: crate::ColorSpace,
        found: crate::ColorSpace,
    },

    #[error("incompatible warps: {0}")]
    IncompatibleWarps(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("warp file line {line}: {message}")]
    WarpFormat { line: usize, message: String },

    #[error("non-finite cost at stage {stage} (h = {bandwidth}), iteration {iteration}")]
    NonFiniteCost {
        stage: usize,
        bandwidth: f64,
        iteration: usize,
    },
}

impl Error {
    pub(crate) fn dims(left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_w: left.0,
            left_h: left.1,
            right_w: right.0,
            right_h: right.1,
        }
    }
}
