//! Offline generation and persistence of per-epoch shuffled dataset
//! variants.
//!
//! Each epoch is stored as a single binary blob: every image's bytes in
//! dataset order, each image row-major with interleaved channels (the
//! in-memory [`ImageTensor`] layout). Labels are never duplicated; they
//! stay with the base dataset. A JSON manifest records the blob paths and
//! their SHA-256 checksums and is written only after all blobs are on disk.

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::shuffle::{csvar_shuffle, ShuffleConfig, ShuffleMode};
use crate::tensor::ImageTensor;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantFile {
    pub epoch: usize,
    /// Path relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
}

/// Written to `manifest.json` next to the epoch blobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub source: String,
    /// (height, width, channels) of every variant image.
    pub shape: [u32; 3],
    pub num_classes: u32,
    pub epochs: usize,
    pub master_seed: u64,
    pub mode: ShuffleMode,
    pub files: Vec<VariantFile>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Shuffle every image of `dataset` for one epoch, image id = index.
fn shuffle_epoch(
    dataset: &LabeledDataset,
    config: &ShuffleConfig,
    epoch: u64,
) -> Result<Vec<ImageTensor>> {
    let cfg = config.at_epoch(epoch);
    dataset
        .images()
        .iter()
        .enumerate()
        .map(|(i, img)| csvar_shuffle(img, &cfg, i as u64))
        .collect()
}

/// Generate `epochs` distinct shuffled copies of `dataset` and persist them
/// under `out_dir`, returning the manifest (also written to
/// `out_dir/manifest.json`). Image dimensions must already divide the
/// adaptive region size; pad the dataset first otherwise.
pub fn generate_epoch_variants(
    dataset: &LabeledDataset,
    config: &ShuffleConfig,
    epochs: usize,
    out_dir: &Path,
    source: &str,
) -> Result<DatasetManifest> {
    if epochs == 0 {
        return Err(Error::InvalidConfig("epochs must be at least 1".into()));
    }
    fs::create_dir_all(out_dir)?;
    let (h, w, c) = dataset.shape();
    let mut files = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let images = shuffle_epoch(dataset, config, epoch as u64)?;
        let mut blob = Vec::with_capacity(dataset.len() * (h * w * c) as usize);
        for img in &images {
            blob.extend_from_slice(img.data());
        }
        let name = format!("epoch_{epoch:03}.bin");
        fs::write(out_dir.join(&name), &blob)?;
        files.push(VariantFile {
            epoch,
            path: name,
            sha256: sha256_hex(&blob),
        });
    }
    let manifest = DatasetManifest {
        source: source.to_string(),
        shape: [h, w, c],
        num_classes: dataset.num_classes(),
        epochs,
        master_seed: config.master_seed,
        mode: config.mode,
        files,
    };
    // write-then-publish: the manifest lands after every blob
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// In-memory epoch variants consumed by the federated simulator.
#[derive(Debug, Clone)]
pub struct VariantSet {
    epochs: Vec<Vec<ImageTensor>>,
}

impl VariantSet {
    /// Generate variants directly in memory (no files).
    pub fn generate(
        dataset: &LabeledDataset,
        config: &ShuffleConfig,
        epochs: usize,
    ) -> Result<Self> {
        if epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        let epochs = (0..epochs)
            .map(|e| shuffle_epoch(dataset, config, e as u64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { epochs })
    }

    /// Load variants from a manifest, verifying every blob's checksum.
    pub fn load(manifest_path: &Path) -> Result<(Self, DatasetManifest)> {
        let manifest: DatasetManifest = serde_json::from_slice(&fs::read(manifest_path)?)?;
        let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        let [h, w, c] = manifest.shape;
        let image_bytes = (h * w * c) as usize;
        let mut epochs = Vec::with_capacity(manifest.files.len());
        for file in &manifest.files {
            let path = dir.join(&file.path);
            let blob = fs::read(&path)?;
            if sha256_hex(&blob) != file.sha256 {
                return Err(Error::ChecksumMismatch {
                    path: path.display().to_string(),
                });
            }
            if image_bytes == 0 || blob.len() % image_bytes != 0 {
                return Err(Error::InvalidShape(format!(
                    "variant blob {} is not a whole number of {h}x{w}x{c} images",
                    path.display()
                )));
            }
            let images = blob
                .chunks_exact(image_bytes)
                .map(|chunk| ImageTensor::new(h, w, c, chunk.to_vec()))
                .collect::<Result<Vec<_>>>()?;
            epochs.push(images);
        }
        Ok((Self { epochs }, manifest))
    }

    pub fn num_epochs(&self) -> usize {
        self.epochs.len()
    }

    pub fn epoch(&self, e: usize) -> &[ImageTensor] {
        &self.epochs[e]
    }

    pub fn image(&self, epoch: usize, index: usize) -> &ImageTensor {
        &self.epochs[epoch][index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shuffle::ShuffleMode;

    fn small_dataset() -> LabeledDataset {
        crate::synth::digits_dataset(10, 424242)
    }

    #[test]
    fn generates_expected_files_and_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let ds = small_dataset();
        let cfg = ShuffleConfig::new(5, 0, ShuffleMode::ChannelWise);
        let manifest = generate_epoch_variants(&ds, &cfg, 3, dir.path(), "synth").unwrap();
        assert_eq!(manifest.files.len(), 3);
        assert_eq!(manifest.shape, [32, 32, 1]);

        let (set, loaded) = VariantSet::load(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(loaded.epochs, 3);
        assert_eq!(set.num_epochs(), 3);
        assert_eq!(set.epoch(1).len(), 10);

        // reloading a variant equals recomputing the shuffle
        let recomputed = csvar_shuffle(ds.image(4), &cfg.at_epoch(1), 4).unwrap();
        assert_eq!(set.image(1, 4), &recomputed);
    }

    #[test]
    fn regeneration_reproduces_checksums() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let ds = small_dataset();
        let cfg = ShuffleConfig::new(5, 0, ShuffleMode::SpatialOnly);
        let a = generate_epoch_variants(&ds, &cfg, 2, dir_a.path(), "synth").unwrap();
        let b = generate_epoch_variants(&ds, &cfg, 2, dir_b.path(), "synth").unwrap();
        let sums = |m: &DatasetManifest| -> Vec<String> {
            m.files.iter().map(|f| f.sha256.clone()).collect()
        };
        assert_eq!(sums(&a), sums(&b));

        let other = ShuffleConfig::new(6, 0, ShuffleMode::SpatialOnly);
        let dir_c = tempfile::tempdir().unwrap();
        let c = generate_epoch_variants(&ds, &other, 2, dir_c.path(), "synth").unwrap();
        assert_ne!(sums(&a), sums(&c), "different master seeds must differ");
    }

    #[test]
    fn load_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let ds = small_dataset();
        let cfg = ShuffleConfig::new(5, 0, ShuffleMode::SpatialOnly);
        generate_epoch_variants(&ds, &cfg, 1, dir.path(), "synth").unwrap();
        let blob_path = dir.path().join("epoch_000.bin");
        let mut blob = std::fs::read(&blob_path).unwrap();
        blob[100] ^= 0xff;
        std::fs::write(&blob_path, &blob).unwrap();
        assert!(matches!(
            VariantSet::load(&dir.path().join("manifest.json")),
            Err(Error::ChecksumMismatch { .. })
        ));
    }
}
