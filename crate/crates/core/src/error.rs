use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported L^p exponent {0}; expected 2, 4 or 12")]
    UnsupportedExponent(u32),

    #[error("mode count mismatch: expected {expected}, found {found}")]
    ModeMismatch { expected: usize, found: usize },

    #[error("a field with {modes} modes needs more than {points} grid points")]
    GridTooCoarse { modes: usize, points: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("trajectory already reached its last step {0}")]
    PastHorizon(usize),

    #[error("out-of-order accumulation: expected step {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },

    #[error("support violation: nonzero coefficient in mode {mode} outside the allowed range")]
    SupportViolation { mode: usize },

    #[error("negative radicand {value:e} at lambda = {lambda:e}")]
    NegativeRadicand { lambda: f64, value: f64 },

    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
