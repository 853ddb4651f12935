use thiserror::Error;

/// Errors produced by the analysis toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed weight: {0}")]
    MalformedWeight(String),

    #[error("malformed symbol: {0}")]
    MalformedSymbol(String),

    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("incompatible grids: {0}")]
    IncompatibleGrid(String),

    #[error("insufficient resolution: {usable} usable annuli, need at least {required}")]
    InsufficientResolution { usable: usize, required: usize },

    #[error("grid too large for this operation: {0}")]
    GridTooLarge(String),

    #[error("symbol is not elliptic on the requested region (margin {margin:.3e} < {c_min:.3e})")]
    NonElliptic { margin: f64, c_min: f64 },

    #[error("quantization calibration failed: {0}")]
    Calibration(String),

    #[error("unknown generator: {0}")]
    UnknownGenerator(String),

    #[error("unknown case: {0}")]
    UnknownCase(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
