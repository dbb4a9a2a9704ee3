use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("feeding antenna coincides with RIS element {element}")]
    ZeroDistance { element: usize },

    #[error("scene has no targets and no injected paths")]
    EmptyScene,

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("path file row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("path file row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("path delay {delay_s:e} s is not shorter than the chirp duration {t_active_s:e} s")]
    RangeOverflow { delay_s: f64, t_active_s: f64 },

    #[error("degenerate sensing grid: {0}")]
    DegenerateGrid(String),

    #[error("invalid radar configuration: {0}")]
    InvalidRadar(String),

    #[error("invalid run configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("malformed sensing-matrix dump: {0}")]
    BadDump(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "invalid_geometry",
            Error::ZeroDistance { .. } => "zero_distance",
            Error::EmptyScene => "empty_scene",
            Error::InvalidScene(_) => "invalid_scene",
            Error::Parse { .. } => "parse_error",
            Error::Validation { .. } => "validation_error",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::RangeOverflow { .. } => "range_overflow",
            Error::DegenerateGrid(_) => "degenerate_grid",
            Error::InvalidRadar(_) => "invalid_radar",
            Error::InvalidConfig(_) => "invalid_config",
            Error::BadDump(_) => "bad_dump",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
