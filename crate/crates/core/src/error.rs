use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong inside the cipher and its analysis tooling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed image data: {0}")]
    MalformedImage(String),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    /// JPEG and friends: pixel values would not survive a round trip.
    #[error("lossy container {0} cannot carry ciphertext; re-encode as PNG or PPM")]
    LossyFormat(&'static str),

    #[error("unsupported bit depth {0}; only 8 bits per channel is accepted")]
    BitDepth(u32),

    #[error("image has an alpha channel; strip it or pass the strip option")]
    AlphaChannel,

    #[error("image dimensions must be positive, got {height}x{width}")]
    EmptyImage { height: usize, width: usize },

    #[error("byte sequence has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("image is {height}x{width}; the Arnold transform needs a square image")]
    NonSquare { height: usize, width: usize },

    #[error("position ({x}, {y}, {z}) lies outside a {size}x{size}x3 grid")]
    OutOfBounds {
        x: usize,
        y: usize,
        z: usize,
        size: usize,
    },

    #[error("Arnold period exceeds the search cap of {cap} applications")]
    PeriodCapExceeded { cap: u64 },

    #[error("chaos parameter {name} is not finite")]
    NonFiniteParameter { name: &'static str },

    /// The trajectory escaped to infinity (or NaN); the key is unusable.
    #[error("hyper-chaotic trajectory diverged at iterate {step}")]
    Divergence { step: usize },

    #[error("image dimensions differ: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("channel has no pixels")]
    EmptyChannel,

    /// Pearson correlation is undefined when one marginal is constant.
    #[error("correlation is undefined: a sample marginal has zero variance")]
    ZeroVariance,

    #[error("image has no adjacent pixel pairs in the requested direction")]
    NoAdjacentPairs,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
