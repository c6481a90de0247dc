use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("buffer length {actual} does not match {expected} ({what})")]
    BufferLength {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("non-finite value {value} at ({x}, {y})")]
    NonFinite { x: usize, y: usize, value: f64 },

    #[error("non-finite input to step function: {0}")]
    NonFiniteStep(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no valid pixels: {0}")]
    NoValidPixels(&'static str),

    #[error("degenerate disparity: neighborhood disparity variation sums to zero")]
    DegenerateDisparity,

    #[error("negative disparity {value} at ({x}, {y})")]
    NegativeDisparity { x: usize, y: usize, value: f64 },

    #[error("non-positive consistency denominator {value} at ({x}, {y})")]
    NonPositiveDenominator { x: usize, y: usize, value: f64 },

    #[error("value {value} out of range for {format}")]
    OutOfRange { format: &'static str, value: f64 },

    #[error("malformed {format} file {path}: {reason}")]
    Malformed {
        format: &'static str,
        path: PathBuf,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{term} loss: {source}")]
    Term {
        term: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_term(self, term: &'static str) -> Self {
        Error::Term {
            term,
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through `Term` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Term { source, .. } => source.root(),
            other => other,
        }
    }
}
