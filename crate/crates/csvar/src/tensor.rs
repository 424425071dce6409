//! Image container, region grids, and per-region variance statistics.
//!
//! Images are dense H×W×C grids of 8-bit intensities, row-major with
//! interleaved channels. Regions are S×S tiles where S is derived from the
//! image dimensions ([`region_size`]); the per-region variance is the
//! channel-averaged population variance of raw 0–255 pixel values and acts
//! as the privacy-sensitivity score that drives adaptive shuffling.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense 8-bit image: `height × width × channels`, row-major, channels
/// interleaved per pixel. Channels must be 1 (grayscale) or 3 (RGB).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageTensor {
    height: u32,
    width: u32,
    channels: u32,
    data: Vec<u8>,
}

impl ImageTensor {
    pub fn new(height: u32, width: u32, channels: u32, data: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidShape(format!(
                "zero dimension: {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidShape(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let expected = height as usize * width as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::InvalidShape(format!(
                "data length {} does not match {height}x{width}x{channels} = {expected}",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Image with every sample set to `value`.
    pub fn filled(height: u32, width: u32, channels: u32, value: u8) -> Result<Self> {
        let len = height as usize * width as usize * channels as usize;
        Self::new(height, width, channels, vec![value; len])
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    /// (height, width, channels)
    pub fn shape(&self) -> (u32, u32, u32) {
        (self.height, self.width, self.channels)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32, c: u32) -> usize {
        ((y as usize * self.width as usize) + x as usize) * self.channels as usize + c as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, c: u32) -> u8 {
        self.data[self.index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: u32, value: u8) {
        let i = self.index(x, y, c);
        self.data[i] = value;
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    /// True when `rect` lies fully inside the image.
    pub fn contains(&self, rect: Rect) -> bool {
        rect.width > 0
            && rect.height > 0
            && rect.x.checked_add(rect.width).is_some_and(|r| r <= self.width)
            && rect.y.checked_add(rect.height).is_some_and(|b| b <= self.height)
    }
}

/// Axis-aligned pixel rectangle: `x`/`y` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, width: u32, height: u32) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }
}

/// One tile of a [`RegionGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub row: u32,
    pub col: u32,
    pub rect: Rect,
}

/// Exact tiling of an image into non-overlapping S×S regions.
#[derive(Debug, Clone)]
pub struct RegionGrid {
    region_size: u32,
    rows: u32,
    cols: u32,
    regions: Vec<Region>,
}

impl RegionGrid {
    pub fn region_size(&self) -> u32 {
        self.region_size
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn region(&self, row: u32, col: u32) -> Region {
        self.regions[(row as usize * self.cols as usize) + col as usize]
    }
}

/// Per-region variances of one image plus their median, the sensitivity
/// threshold used for adaptive block partitioning.
#[derive(Debug, Clone)]
pub struct VarianceMap {
    rows: u32,
    cols: u32,
    values: Vec<f64>,
    median: f64,
}

impl VarianceMap {
    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    /// Row-major per-region variances.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, row: u32, col: u32) -> f64 {
        self.values[(row as usize * self.cols as usize) + col as usize]
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Adaptive region size: the smallest power of two S with S² ≥ max(H, W),
/// floored at 2 so that halving and quartering stay meaningful.
///
/// Equivalent to `2^ceil(log2(sqrt(max(H, W))))` but computed in integer
/// arithmetic so boundary cases cannot be lost to rounding.
pub fn region_size(height: u32, width: u32) -> u32 {
    debug_assert!(height >= 1 && width >= 1);
    let target = height.max(width) as u64;
    let mut s: u64 = 1;
    while s * s < target {
        s *= 2;
    }
    s.max(2) as u32
}

/// Ping-pong mirror of index `i` into `[0, len)`: the extension of
/// `0 1 2 3` is `0 1 2 3 3 2 1 0 0 1 2 3 …`, so edge pixels repeat and the
/// mapping is total for any pad amount.
fn mirror_index(i: u32, len: u32) -> u32 {
    let period = 2 * len;
    let m = i % period;
    if m < len {
        m
    } else {
        period - 1 - m
    }
}

/// Grow an image on the right/bottom to the next multiple of `s` in each
/// dimension, filling new pixels by mirroring interior rows/columns.
/// Returns a copy of the input when both dimensions already divide evenly.
pub fn reflect_pad_to_multiple(image: &ImageTensor, s: u32) -> ImageTensor {
    assert!(s >= 1, "pad target must be at least 1");
    let (h, w, c) = image.shape();
    let new_h = h.div_ceil(s) * s;
    let new_w = w.div_ceil(s) * s;
    if new_h == h && new_w == w {
        return image.clone();
    }
    let mut data = vec![0u8; new_h as usize * new_w as usize * c as usize];
    for y in 0..new_h {
        let sy = mirror_index(y, h);
        for x in 0..new_w {
            let sx = mirror_index(x, w);
            let src = image.index(sx, sy, 0);
            let dst = ((y as usize * new_w as usize) + x as usize) * c as usize;
            data[dst..dst + c as usize].copy_from_slice(&image.data()[src..src + c as usize]);
        }
    }
    ImageTensor::new(new_h, new_w, c, data).expect("padded shape is valid")
}

/// Tile an image into non-overlapping `s`×`s` regions. Dimensions must
/// divide evenly; call [`reflect_pad_to_multiple`] first if they do not.
pub fn partition_regions(image: &ImageTensor, s: u32) -> Result<RegionGrid> {
    let (h, w, _) = image.shape();
    if s == 0 || h % s != 0 || w % s != 0 {
        return Err(Error::NonDivisibleDimensions {
            height: h,
            width: w,
            region_size: s,
        });
    }
    let rows = h / s;
    let cols = w / s;
    let mut regions = Vec::with_capacity(rows as usize * cols as usize);
    for row in 0..rows {
        for col in 0..cols {
            regions.push(Region {
                row,
                col,
                rect: Rect::new(col * s, row * s, s, s),
            });
        }
    }
    Ok(RegionGrid {
        region_size: s,
        rows,
        cols,
        regions,
    })
}

/// Channel-averaged population variance of raw pixel values over `rect`.
///
/// Per channel: `(1/n) Σ (v − μ)²` with `n` the pixel count of the
/// rectangle; the result is the mean over channels. Computed from exact
/// integer sums (`n·Σv² − (Σv)²`) so a constant region yields exactly 0.
pub fn region_variance(image: &ImageTensor, rect: Rect) -> Result<f64> {
    if !image.contains(rect) {
        return Err(Error::RegionOutOfBounds {
            rect,
            height: image.height(),
            width: image.width(),
        });
    }
    let c = image.channels();
    let n = rect.width as u128 * rect.height as u128;
    let mut acc = 0.0f64;
    for ch in 0..c {
        let mut sum: u128 = 0;
        let mut sum_sq: u128 = 0;
        for y in rect.y..rect.y + rect.height {
            for x in rect.x..rect.x + rect.width {
                let v = image.get(x, y, ch) as u128;
                sum += v;
                sum_sq += v * v;
            }
        }
        let numerator = n * sum_sq - sum * sum;
        acc += numerator as f64 / (n as f64 * n as f64);
    }
    Ok(acc / c as f64)
}

/// Median with the even-count convention: mean of the two middle values.
pub(crate) fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("variances are finite"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Per-region variance of every tile in `grid`, plus the median across all
/// regions of this image.
pub fn variance_map(image: &ImageTensor, grid: &RegionGrid) -> Result<VarianceMap> {
    let mut values = Vec::with_capacity(grid.len());
    for region in grid.regions() {
        values.push(region_variance(image, region.rect)?);
    }
    let median = median(&values);
    Ok(VarianceMap {
        rows: grid.rows(),
        cols: grid.cols(),
        values,
        median,
    })
}
