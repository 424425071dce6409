//! Crate-wide error type.

use crate::tensor::Rect;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // image / region errors
    #[error("invalid image shape: {0}")]
    InvalidShape(String),
    #[error("image dimensions {height}x{width} are not divisible by region size {region_size}")]
    NonDivisibleDimensions {
        height: u32,
        width: u32,
        region_size: u32,
    },
    #[error("region {rect:?} lies outside a {height}x{width} image")]
    RegionOutOfBounds {
        rect: Rect,
        height: u32,
        width: u32,
    },

    // shuffle errors
    #[error("block size {block_size} does not tile a region of size {region_size}")]
    BlockSizeMismatch { block_size: u32, region_size: u32 },
    #[error("override block size {override_size} does not divide region size {region_size}")]
    InvalidOverride {
        override_size: u32,
        region_size: u32,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // dataset i/o errors
    #[error("bad magic number: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("file length mismatch in {path}: expected {expected} bytes, found {found}")]
    TruncatedFile {
        path: String,
        expected: u64,
        found: u64,
    },
    #[error("count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: u32, num_classes: u32 },
    #[error("malformed netpbm header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("checksum mismatch for variant file {path}")]
    ChecksumMismatch { path: String },
    #[error("client {0} received no samples after retries")]
    EmptyClient(usize),

    // federated simulator errors
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty client list")]
    EmptyClientList,
    #[error("missing shuffled variant for epoch {epoch}")]
    MissingVariant { epoch: usize },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    // attack / metric errors
    #[error("empty cohort: {0}")]
    EmptyCohort(&'static str),
    #[error("not a color image: {channels} channel(s)")]
    NotColorImage { channels: u32 },
    #[error("internal invariant violated: {0}")]
    Internal(String),

    // plumbing
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
