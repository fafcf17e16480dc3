use std::path::PathBuf;

use crate::mathkit::MathError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("gaussian approximation breaks down: s = {s} (M = {elements})")]
    ApproximationBreakdown { s: f64, elements: usize },
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("closed form clamped in {clamped} of {evaluations} evaluations")]
    ExcessiveClamping { clamped: u64, evaluations: u64 },
    #[error(transparent)]
    Math(#[from] MathError),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid { field, reason: reason.into() }
    }
}
