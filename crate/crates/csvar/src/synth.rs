//! Procedural test imagery: natural-looking images and class-structured
//! labeled datasets. These back the runnable examples, the `synth` dataset
//! source of the CLI, and the test suite, so no external image files are
//! required anywhere. Everything is seeded and deterministic.

use crate::data::LabeledDataset;
use crate::shuffle::mix_seed;
use crate::tensor::{ImageTensor, Rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const FIELD_SEED_TAG: u64 = 0x11;
const TEMPLATE_SEED: u64 = 0x7e3a_11ce_0000_0001;

/// Smooth random field: a coarse grid of random amplitudes in
/// `[-amp, amp]`, bilinearly interpolated to `h`×`w`.
fn smooth_field(h: u32, w: u32, cell: u32, amp: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gh = h / cell + 2;
    let gw = w / cell + 2;
    let grid: Vec<f64> = (0..gh as usize * gw as usize)
        .map(|_| rng.random_range(-amp..amp))
        .collect();
    let mut out = vec![0.0; h as usize * w as usize];
    for y in 0..h {
        let fy = y as f64 / cell as f64;
        let gy = fy.floor() as usize;
        let ty = fy - gy as f64;
        for x in 0..w {
            let fx = x as f64 / cell as f64;
            let gx = fx.floor() as usize;
            let tx = fx - gx as f64;
            let g = |r: usize, c: usize| grid[r * gw as usize + c];
            let top = g(gy, gx) * (1.0 - tx) + g(gy, gx + 1) * tx;
            let bot = g(gy + 1, gx) * (1.0 - tx) + g(gy + 1, gx + 1) * tx;
            out[(y * w + x) as usize] = top * (1.0 - ty) + bot * ty;
        }
    }
    out
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Natural-looking test image: layered smooth fields plus a textured
/// subject patch, with fine grain everywhere. For three channels, all
/// planes derive from one shared luminance field with mild per-channel
/// gain/offset, so channels are strongly correlated like in photographs.
pub fn natural_image(height: u32, width: u32, channels: u32, seed: u64) -> ImageTensor {
    assert!(channels == 1 || channels == 3);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[FIELD_SEED_TAG]));
    let base = rng.random_range(70.0..150.0);
    let coarse = smooth_field(height, width, 8, 45.0, &mut rng);
    let mid = smooth_field(height, width, 3, 20.0, &mut rng);

    // textured subject patch somewhere in the middle of the frame
    let sw = rng.random_range(width / 3..width / 2 + 1).max(2);
    let sh = rng.random_range(height / 3..height / 2 + 1).max(2);
    let sx = rng.random_range(0..width - sw + 1);
    let sy = rng.random_range(0..height - sh + 1);
    let texture = Normal::new(0.0, 55.0).unwrap();
    let grain = Normal::new(0.0, 6.0).unwrap();

    let mut lum = vec![0.0f64; height as usize * width as usize];
    for y in 0..height {
        for x in 0..width {
            let i = (y * width + x) as usize;
            let mut v = base + coarse[i] + mid[i] + grain.sample(&mut rng);
            if x >= sx && x < sx + sw && y >= sy && y < sy + sh {
                v += texture.sample(&mut rng);
            }
            lum[i] = v;
        }
    }

    let mut data = Vec::with_capacity(lum.len() * channels as usize);
    if channels == 1 {
        data.extend(lum.iter().map(|&v| clamp_u8(v)));
    } else {
        let gains: Vec<f64> = (0..3).map(|_| rng.random_range(0.75..1.05)).collect();
        let offsets: Vec<f64> = (0..3).map(|_| rng.random_range(-18.0..18.0)).collect();
        let chroma = Normal::new(0.0, 4.0).unwrap();
        for &v in &lum {
            for c in 0..3 {
                data.push(clamp_u8(gains[c] * v + offsets[c] + chroma.sample(&mut rng)));
            }
        }
    }
    ImageTensor::new(height, width, channels, data).expect("synth shape is valid")
}

/// Flat background with a single strongly textured subject rectangle;
/// returns the subject bounds so tests can reason about which regions the
/// texture falls into.
pub fn subject_scene(height: u32, width: u32, channels: u32, seed: u64) -> (ImageTensor, Rect) {
    assert!(channels == 1 || channels == 3);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[FIELD_SEED_TAG, 2]));
    let background = rng.random_range(60..180) as u8;
    let mut img = ImageTensor::filled(height, width, channels, background).unwrap();
    let rect = Rect::new(width / 4, height / 4, width / 2, height / 2);
    let texture = Normal::new(0.0, 70.0).unwrap();
    for y in rect.y..rect.y + rect.height {
        for x in rect.x..rect.x + rect.width {
            let v = clamp_u8(background as f64 + texture.sample(&mut rng));
            for c in 0..channels {
                img.set(x, y, c, v);
            }
        }
    }
    (img, rect)
}

fn add_blobs(t: &mut [f64], rng: &mut ChaCha8Rng, count: usize, amp: (f64, f64), sign: f64) {
    for _ in 0..count {
        let cx = rng.random_range(5.0..27.0);
        let cy = rng.random_range(5.0..27.0);
        let r = rng.random_range(3.0..6.5);
        let a = rng.random_range(amp.0..amp.1) * sign;
        for y in 0..32 {
            for x in 0..32 {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                t[y * 32 + x] += a * (-d2 / (2.0 * r * r)).exp();
            }
        }
    }
}

/// Per-class 32×32 intensity template. Classes come in pairs that share a
/// high-contrast base layout and differ only by a low-amplitude delta
/// pattern, so telling paired classes apart requires low-contrast detail.
/// Templates depend only on the class index, so independently generated
/// splits share them.
fn class_template(class: u32) -> Vec<f64> {
    let pair = class / 2;
    let mut base_rng = ChaCha8Rng::seed_from_u64(mix_seed(TEMPLATE_SEED, &[pair as u64]));
    let mut t = vec![0.0f64; 32 * 32];
    add_blobs(&mut t, &mut base_rng, 3, (30.0, 50.0), 1.0);

    let mut delta_rng =
        ChaCha8Rng::seed_from_u64(mix_seed(TEMPLATE_SEED, &[0xde17a, pair as u64]));
    let sign = if class.is_multiple_of(2) { 1.0 } else { -1.0 };
    add_blobs(&mut t, &mut delta_rng, 2, (10.0, 16.0), sign);
    t
}

/// Digit-like labeled dataset: 32×32 grayscale, ten classes, balanced
/// labels. Every sample combines its class template with sample-specific
/// brightness, contrast, a smooth field, and pixel grain, so a classifier
/// can both learn the classes and overfit to individual samples.
pub fn digits_dataset(samples: usize, seed: u64) -> LabeledDataset {
    let num_classes = 10u32;
    let templates: Vec<Vec<f64>> = (0..num_classes).map(class_template).collect();
    let mut images = Vec::with_capacity(samples);
    let mut labels = Vec::with_capacity(samples);
    for i in 0..samples {
        let label = (i as u32) % num_classes;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[3, i as u64]));
        let bg = rng.random_range(40.0..85.0);
        let contrast = rng.random_range(0.8..1.2);
        let field = smooth_field(32, 32, 16, 10.0, &mut rng);
        let grain = Normal::new(0.0, 30.0).unwrap();
        let template = &templates[label as usize];
        let data: Vec<u8> = (0..32 * 32)
            .map(|p| clamp_u8(bg + contrast * template[p] + field[p] + grain.sample(&mut rng)))
            .collect();
        images.push(ImageTensor::new(32, 32, 1, data).unwrap());
        labels.push(label);
    }
    LabeledDataset::new(images, labels, num_classes).expect("synth dataset is consistent")
}

/// CIFAR-shaped color dataset built from [`natural_image`] frames with the
/// class template blended into the luminance. Used where color inputs are
/// needed; classes are balanced.
pub fn color_dataset(samples: usize, seed: u64) -> LabeledDataset {
    let num_classes = 10u32;
    let templates: Vec<Vec<f64>> = (0..num_classes).map(class_template).collect();
    let mut images = Vec::with_capacity(samples);
    let mut labels = Vec::with_capacity(samples);
    for i in 0..samples {
        let label = (i as u32) % num_classes;
        let base = natural_image(32, 32, 3, mix_seed(seed, &[4, i as u64]));
        let template = &templates[label as usize];
        let mut data = base.into_data();
        for (p, &t) in template.iter().enumerate() {
            for c in 0..3 {
                let idx = p * 3 + c;
                data[idx] = clamp_u8(data[idx] as f64 + 0.8 * t);
            }
        }
        images.push(ImageTensor::new(32, 32, 3, data).unwrap());
        labels.push(label);
    }
    LabeledDataset::new(images, labels, num_classes).expect("synth dataset is consistent")
}
