//! Variance-guided adaptive block partitioning and the seeded shuffling
//! operations: spatial block shuffling, channel-wise block shuffling, and
//! the Gaussian-noise baseline.
//!
//! Everything here is deterministic. The seed scheme is pinned so golden
//! outputs stay stable:
//!
//! * Seeds are derived by [`derive_region_seed`]: starting from the master
//!   seed, each of (image_id, epoch, region_row, region_col, channel) is
//!   folded in sequentially as `h = mix64(h + x + (i+1)·GOLDEN)` where
//!   `mix64` is the SplitMix64 finalizer and `GOLDEN = 0x9e3779b97f4a7c15`.
//! * Block permutations are Fisher–Yates over block indices, iterating
//!   `i = n-1 .. 1` and swapping with `j = next_u64() mod (i+1)`, where the
//!   generator is `ChaCha8Rng::seed_from_u64(seed)`.
//! * Output block `d` receives input block `perm[d]`.
//!
//! Reproducibility is guaranteed within this implementation, not across
//! unrelated ones.

use crate::error::{Error, Result};
use crate::tensor::{
    partition_regions, region_size, variance_map, ImageTensor, Rect, VarianceMap,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Which shuffle is applied inside each region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShuffleMode {
    /// Blocks move as whole pixels; co-located channel values stay together.
    #[serde(rename = "spatial-only")]
    SpatialOnly,
    /// Each channel plane is permuted independently, decorrelating channels.
    #[serde(rename = "channel-wise")]
    ChannelWise,
}

impl std::fmt::Display for ShuffleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShuffleMode::SpatialOnly => write!(f, "spatial-only"),
            ShuffleMode::ChannelWise => write!(f, "channel-wise"),
        }
    }
}

/// Full description of one obfuscation pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShuffleConfig {
    pub master_seed: u64,
    /// Epoch index; distinct epochs yield distinct shuffles. Epoch 0 is the
    /// variant used for data transfer.
    pub epoch: u64,
    pub mode: ShuffleMode,
    /// Uniform block size that bypasses variance-guided partitioning;
    /// used for granularity sweeps. Must divide the region size.
    pub block_size_override: Option<u32>,
    /// Gaussian baseline noise level. Mutually exclusive with shuffling:
    /// a config carrying `dp_sigma` is rejected by [`csvar_shuffle`].
    pub dp_sigma: Option<f64>,
}

impl ShuffleConfig {
    pub fn new(master_seed: u64, epoch: u64, mode: ShuffleMode) -> Self {
        Self {
            master_seed,
            epoch,
            mode,
            block_size_override: None,
            dp_sigma: None,
        }
    }

    pub fn with_override(mut self, block_size: u32) -> Self {
        self.block_size_override = Some(block_size);
        self
    }

    pub fn at_epoch(&self, epoch: u64) -> Self {
        let mut c = self.clone();
        c.epoch = epoch;
        c
    }
}

/// Per-region block sizes chosen by the adaptive partitioning rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    region_size: u32,
    rows: u32,
    cols: u32,
    block_sizes: Vec<u32>,
}

impl PartitionPlan {
    pub fn region_size(&self) -> u32 {
        self.region_size
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    /// Row-major per-region block sizes.
    pub fn block_sizes(&self) -> &[u32] {
        &self.block_sizes
    }

    pub fn block_size(&self, row: u32, col: u32) -> u32 {
        self.block_sizes[(row as usize * self.cols as usize) + col as usize]
    }
}

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Fold a sequence of words into `seed`, position-sensitively.
pub(crate) fn mix_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed;
    for (i, &x) in parts.iter().enumerate() {
        h = mix64(
            h.wrapping_add(x)
                .wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1)),
        );
    }
    h
}

/// Deterministic per-region, per-channel seed for one (image, epoch).
pub fn derive_region_seed(
    master_seed: u64,
    image_id: u64,
    epoch: u64,
    region_row: u32,
    region_col: u32,
    channel: u32,
) -> u64 {
    mix_seed(
        master_seed,
        &[
            image_id,
            epoch,
            region_row as u64,
            region_col as u64,
            channel as u64,
        ],
    )
}

/// Fisher–Yates permutation of `0..n` drawn from `seed`.
/// `perm[d]` is the source index feeding destination `d`.
pub(crate) fn permutation(n: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    perm
}

/// Variance-guided block sizes: regions whose variance strictly exceeds the
/// map median get `S/4` blocks (privacy-sensitive), the rest get `S/2`,
/// both floored at one pixel. A present `override_size` fills every cell.
pub fn plan_partition(
    vmap: &VarianceMap,
    s: u32,
    override_size: Option<u32>,
) -> Result<PartitionPlan> {
    if s < 2 || !s.is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "region size must be a power of two >= 2, got {s}"
        )));
    }
    if let Some(o) = override_size {
        if o == 0 || !s.is_multiple_of(o) {
            return Err(Error::InvalidOverride {
                override_size: o,
                region_size: s,
            });
        }
    }
    let median = vmap.median();
    let block_sizes = vmap
        .values()
        .iter()
        .map(|&v| match override_size {
            Some(o) => o,
            None => {
                if v > median {
                    (s / 4).max(1)
                } else {
                    (s / 2).max(1)
                }
            }
        })
        .collect();
    Ok(PartitionPlan {
        region_size: s,
        rows: vmap.rows(),
        cols: vmap.cols(),
        block_sizes,
    })
}

fn check_region(image: &ImageTensor, rect: Rect, block_size: u32) -> Result<()> {
    if !image.contains(rect) {
        return Err(Error::RegionOutOfBounds {
            rect,
            height: image.height(),
            width: image.width(),
        });
    }
    if rect.width != rect.height {
        return Err(Error::BlockSizeMismatch {
            block_size,
            region_size: rect.width.max(rect.height),
        });
    }
    if block_size == 0 || !rect.width.is_multiple_of(block_size) {
        return Err(Error::BlockSizeMismatch {
            block_size,
            region_size: rect.width,
        });
    }
    Ok(())
}

/// Copy the pixels of `rect` out of `image` into a compact row-major buffer.
fn extract_region(image: &ImageTensor, rect: Rect) -> Vec<u8> {
    let c = image.channels() as usize;
    let row_bytes = rect.width as usize * c;
    let mut buf = Vec::with_capacity(rect.height as usize * row_bytes);
    for y in rect.y..rect.y + rect.height {
        let start = image.index(rect.x, y, 0);
        buf.extend_from_slice(&image.data()[start..start + row_bytes]);
    }
    buf
}

/// Write block `src` of `region_buf` (side `bs`, `nb` blocks per side) into
/// block `dst` of `rect` within `image`, restricted to channel `ch` when
/// given, all channels otherwise.
#[allow(clippy::too_many_arguments)]
fn place_block(
    image: &mut ImageTensor,
    rect: Rect,
    region_buf: &[u8],
    src: u32,
    dst: u32,
    bs: u32,
    nb: u32,
    ch: Option<u32>,
) {
    let c = image.channels() as usize;
    let region_row_bytes = rect.width as usize * c;
    let (src_by, src_bx) = (src / nb, src % nb);
    let (dst_by, dst_bx) = (dst / nb, dst % nb);
    for dy in 0..bs {
        let src_off =
            (src_by * bs + dy) as usize * region_row_bytes + (src_bx * bs) as usize * c;
        let dst_x = rect.x + dst_bx * bs;
        let dst_y = rect.y + dst_by * bs + dy;
        match ch {
            None => {
                let dst_off = image.index(dst_x, dst_y, 0);
                let n = bs as usize * c;
                image.data_mut()[dst_off..dst_off + n]
                    .copy_from_slice(&region_buf[src_off..src_off + n]);
            }
            Some(ch) => {
                for dx in 0..bs as usize {
                    let v = region_buf[src_off + dx * c + ch as usize];
                    image.set(dst_x + dx as u32, dst_y, ch, v);
                }
            }
        }
    }
}

/// Permute the positions of `bs`×`bs` blocks inside one region, moving all
/// channels of a block together. Pixels inside a block keep their layout.
pub fn spatial_shuffle_region(
    image: &mut ImageTensor,
    rect: Rect,
    block_size: u32,
    seed: u64,
) -> Result<()> {
    check_region(image, rect, block_size)?;
    let nb = rect.width / block_size;
    let n = (nb * nb) as usize;
    if n <= 1 {
        return Ok(());
    }
    let perm = permutation(n, seed);
    let region_buf = extract_region(image, rect);
    for dst in 0..n as u32 {
        place_block(
            image,
            rect,
            &region_buf,
            perm[dst as usize],
            dst,
            block_size,
            nb,
            None,
        );
    }
    Ok(())
}

/// Permute block positions independently per channel plane, one seed per
/// channel. Per-channel value multisets within the region are preserved,
/// but co-located channel combinations are broken apart.
pub fn channel_shuffle_region(
    image: &mut ImageTensor,
    rect: Rect,
    block_size: u32,
    seeds: &[u64],
) -> Result<()> {
    check_region(image, rect, block_size)?;
    if seeds.len() != image.channels() as usize {
        return Err(Error::ShapeMismatch(format!(
            "expected {} per-channel seeds, got {}",
            image.channels(),
            seeds.len()
        )));
    }
    let nb = rect.width / block_size;
    let n = (nb * nb) as usize;
    if n <= 1 {
        return Ok(());
    }
    let region_buf = extract_region(image, rect);
    for (ch, &seed) in seeds.iter().enumerate() {
        let perm = permutation(n, seed);
        for dst in 0..n as u32 {
            place_block(
                image,
                rect,
                &region_buf,
                perm[dst as usize],
                dst,
                block_size,
                nb,
                Some(ch as u32),
            );
        }
    }
    Ok(())
}

/// The full adaptive shuffle: derive the region grid and variance map from
/// the input, plan per-region block sizes, then shuffle every region in the
/// configured mode with seeds from [`derive_region_seed`].
///
/// Image dimensions must already divide the adaptive region size; call
/// [`reflect_pad_to_multiple`](crate::tensor::reflect_pad_to_multiple) first
/// otherwise. Deterministic in (master_seed, epoch, image_id).
pub fn csvar_shuffle(
    image: &ImageTensor,
    config: &ShuffleConfig,
    image_id: u64,
) -> Result<ImageTensor> {
    if config.dp_sigma.is_some() {
        return Err(Error::InvalidConfig(
            "dp_sigma is set; Gaussian noise and shuffling are mutually exclusive".into(),
        ));
    }
    let (h, w, c) = image.shape();
    let s = region_size(h, w);
    let grid = partition_regions(image, s)?;
    let vmap = variance_map(image, &grid)?;
    let plan = plan_partition(&vmap, s, config.block_size_override)?;
    let mut out = image.clone();
    for region in grid.regions() {
        let bs = plan.block_size(region.row, region.col);
        match config.mode {
            ShuffleMode::SpatialOnly => {
                let seed = derive_region_seed(
                    config.master_seed,
                    image_id,
                    config.epoch,
                    region.row,
                    region.col,
                    0,
                );
                spatial_shuffle_region(&mut out, region.rect, bs, seed)?;
            }
            ShuffleMode::ChannelWise => {
                let seeds: Vec<u64> = (0..c)
                    .map(|ch| {
                        derive_region_seed(
                            config.master_seed,
                            image_id,
                            config.epoch,
                            region.row,
                            region.col,
                            ch,
                        )
                    })
                    .collect();
                channel_shuffle_region(&mut out, region.rect, bs, &seeds)?;
            }
        }
    }
    Ok(out)
}

/// Gaussian pixel-noise baseline: every sample becomes
/// `clamp(round(v + N(0, sigma²)), 0, 255)`. Deterministic given `seed`;
/// call with fresh seeds to re-noise per epoch.
pub fn gaussian_obfuscate(image: &ImageTensor, sigma: f64, seed: u64) -> Result<ImageTensor> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "sigma must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(image.clone());
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidConfig(format!("bad sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = image.clone();
    for v in out.data_mut() {
        let noisy = (*v as f64 + normal.sample(&mut rng)).round();
        *v = noisy.clamp(0.0, 255.0) as u8;
    }
    Ok(out)
}
