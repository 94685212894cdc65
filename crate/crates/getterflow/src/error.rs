//! Crate-wide error type. Variants are grouped by whether they indicate a
//! bad input (configuration, file contents) or a runtime fault; the CLI maps
//! the two groups to distinct exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid geometry or simulation parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed input file (pressure log, height map, config).
    #[error("parse error in {path} line {line}: {message}")]
    Parse
    {
        path: String,
        line: usize,
        message: String,
    },

    /// Configuration rejected before execution.
    #[error("config error: {0}")]
    Config(String),

    /// A particle left the geometry without hitting anything. Indicates a
    /// non-watertight mesh, never expected for shipped builders.
    #[error("geometry leak: particle {particle}: {detail}")]
    GeometryLeak { particle: u64, detail: String },

    /// Trapped fraction too high for the histogram to give an unbiased
    /// capture estimate.
    #[error("trapped fraction {fraction:.3e} exceeds reliability gate {gate:.1e}")]
    ExcessiveTrapped { fraction: f64, gate: f64 },

    /// Pressure never fell below the truncation threshold.
    #[error("pressure never reached threshold {threshold:e} mbar after the spike")]
    ThresholdNeverReached { threshold: f64 },

    /// Two rate curves were combined but were not sampled on the same grid.
    #[error("pressure grids do not match: {0}")]
    GridMismatch(String),

    /// Not enough data, or degenerate data, for a least-squares fit.
    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code the CLI uses for this error: 2 for configuration/input
    /// problems, 3 for runtime faults.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Parse { .. }
            | Error::Config(_)
            | Error::Json(_) => 2,
            Error::GeometryLeak { .. }
            | Error::ExcessiveTrapped { .. }
            | Error::ThresholdNeverReached { .. }
            | Error::GridMismatch(_)
            | Error::FitRejected(_)
            | Error::Io(_) => 3,
        }
    }

    /// Short machine-readable tag for the error JSON the CLI prints.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Parse { .. } => "parse_error",
            Error::Config(_) => "config_error",
            Error::GeometryLeak { .. } => "geometry_leak",
            Error::ExcessiveTrapped { .. } => "excessive_trapped",
            Error::ThresholdNeverReached { .. } => "threshold_never_reached",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::FitRejected(_) => "fit_rejected",
            Error::Io(_) => "io_error",
            Error::Json(_) => "json_error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
