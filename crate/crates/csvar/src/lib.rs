//! Visual privacy for federated learning via variance-guided adaptive
//! image shuffling, plus the machinery to measure what it buys and costs:
//! a desk-scale federated simulator, a loss-threshold membership inference
//! attack, and obfuscation metrics.
//!
//! The pipeline: an image is tiled into S×S regions (S adapts to the image
//! size), each region's pixel variance scores its privacy sensitivity,
//! high-variance regions are split into finer blocks than low-variance
//! ones, and block positions are then permuted per region — either moving
//! whole pixels (`spatial-only`) or each channel plane independently
//! (`channel-wise`). Distinct seeds per training epoch yield distinct
//! obfuscations, which is what counters overfitting-driven membership
//! leakage.
//!
//! Start with the `examples/` directory: each example is a runnable tour
//! of one capability (variance maps, shuffling, epoch variants, federated
//! runs, the attack, the metrics). The `csvar` binary wires the same
//! operations into a scriptable CLI.

pub mod cli;
pub mod data;
pub mod error;
pub mod fl;
pub mod metrics;
pub mod shuffle;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use shuffle::{csvar_shuffle, gaussian_obfuscate, ShuffleConfig, ShuffleMode};
pub use tensor::ImageTensor;
