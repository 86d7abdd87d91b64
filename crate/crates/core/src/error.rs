use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = StixelError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum StixelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("image of width {width} has no columns for stixel width {stixel_width}")]
    NoColumns { width: usize, stixel_width: usize },

    #[error("column height {height} exceeds the brute-force limit of {limit}")]
    OracleTooLarge { height: usize, limit: usize },

    #[error("corrupt index table at row {row}: {reason}")]
    CorruptIndexTable { row: usize, reason: String },

    #[error("column {index}: {source}")]
    Column {
        index: usize,
        #[source]
        source: Box<StixelError>,
    },

    #[error("prediction frames missing from ground truth: {frames:?}")]
    FrameMismatch { frames: Vec<u64> },

    #[error("parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<StixelError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl StixelError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        StixelError::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(offset: usize, reason: impl Into<String>) -> Self {
        StixelError::Parse {
            offset,
            reason: reason.into(),
        }
    }

    /// Wraps the error with the file it concerns.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        StixelError::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
