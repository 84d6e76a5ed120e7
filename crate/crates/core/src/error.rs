use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = TpsError> = std::result::Result<T, E>;

/// Axis of a `[batch, time, channel]` array, used to address shape errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Batch,
    Time,
    Channel,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Batch => "batch",
            Axis::Time => "time",
            Axis::Channel => "channel",
        })
    }
}

#[derive(Debug, Error)]
pub enum TpsError {
    #[error("dimension mismatch on {axis} axis: {left} vs {right}")]
    Dimension { axis: Axis, left: usize, right: usize },

    #[error("index {index} out of range for {what} (valid: {valid})")]
    Bounds {
        what: &'static str,
        index: usize,
        valid: String,
    },

    #[error("invalid patch geometry: {0}")]
    Geometry(String),

    #[error("time index {index} is not covered by any patch and no pass-through series was supplied")]
    Uncovered { index: usize },

    #[error("patch variance is undefined for C·p = {0} (needs C·p > 1)")]
    DegenerateVariance(usize),

    #[error("shuffle plan does not match patch tensor: {0}")]
    PlanMismatch(String),

    #[error("interpolation needs at least 2 points, got {0}")]
    Interpolation(usize),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: row {row}, column {column:?}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TpsError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TpsError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input data or the file system rather
    /// than by the requested configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            TpsError::Parse { .. } | TpsError::Data(_) | TpsError::Io { .. } | TpsError::EmptySample
        )
    }
}
