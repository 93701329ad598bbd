use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("value {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },

    #[error("coordinate ({x}, {y}) is outside the {width}x{height} grid")]
    CoordOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("duplicate sample at ({x}, {y})")]
    DuplicateSample { x: usize, y: usize },

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("payload size mismatch: header declares {expected} bytes, found {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("grid size mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("empty sampling")]
    EmptySampling,

    #[error("empty pattern library")]
    EmptyLibrary,

    #[error("area {width}x{height} too small for radius {radius}")]
    AreaTooSmall {
        width: usize,
        height: usize,
        radius: usize,
    },

    #[error("rotation {0} degrees is not a multiple of 15 in [0, 360)")]
    InvalidRotation(u32),

    #[error("degenerate normalization: constant input")]
    DegenerateNormalization,

    #[error("diagram dimension mismatch: H{0} vs H{1}")]
    DiagramDimensionMismatch(u8, u8),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
