use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sample: dist_left = {dist_left}, dist_right = {dist_right}")]
    InvalidSample { dist_left: f64, dist_right: f64 },

    #[error("timestamps must be strictly increasing (sample {index}: {prev} -> {next})")]
    NonMonotonicTime { index: usize, prev: f64, next: f64 },

    #[error("series is empty: {0}")]
    EmptySeries(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("insufficient data: {what} needs at least {needed}, got {available}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("{component} model is not calibrated")]
    NotCalibrated { component: &'static str },

    #[error("csv schema error at row {row}, column `{column}`: {message}")]
    Schema {
        row: usize,
        column: String,
        message: String,
    },

    #[error(transparent)]
    Load(#[from] LoadError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Failure while loading a persisted model file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("unsupported model file version {found} (supported: {supported})")]
    UnsupportedVersion { found: u64, supported: u64 },

    #[error("field `{field}`{}: {reason}", row.map(|r| format!(" row {r}")).unwrap_or_default())]
    Invariant {
        field: &'static str,
        row: Option<usize>,
        reason: String,
    },

    #[error("malformed model file: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
