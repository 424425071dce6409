//! IDX (MNIST-style) loader: big-endian headers, u8 payload.

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::tensor::ImageTensor;
use std::fs;
use std::path::Path;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;
const NUM_CLASSES: u32 = 10;

fn be_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ])
}

/// Load an MNIST-style image/label file pair. Headers are validated
/// strictly: wrong magic, zero dimensions, or any length mismatch between
/// header and payload is rejected.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    let img_bytes = fs::read(images_path)?;
    let lbl_bytes = fs::read(labels_path)?;

    if img_bytes.len() < 4 {
        return Err(Error::TruncatedFile {
            path: images_path.display().to_string(),
            expected: 16,
            found: img_bytes.len() as u64,
        });
    }
    let magic = be_u32(&img_bytes, 0);
    if magic != IMAGES_MAGIC {
        return Err(Error::BadMagic {
            expected: IMAGES_MAGIC,
            found: magic,
        });
    }
    if img_bytes.len() < 16 {
        return Err(Error::TruncatedFile {
            path: images_path.display().to_string(),
            expected: 16,
            found: img_bytes.len() as u64,
        });
    }
    let count = be_u32(&img_bytes, 4) as u64;
    let rows = be_u32(&img_bytes, 8) as u64;
    let cols = be_u32(&img_bytes, 12) as u64;
    if count == 0 || rows == 0 || cols == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension in IDX image header: count={count} rows={rows} cols={cols}"
        )));
    }
    let expected = 16u64
        .checked_add(
            count
                .checked_mul(rows)
                .and_then(|v| v.checked_mul(cols))
                .ok_or_else(|| Error::MalformedHeader("IDX dimensions overflow".into()))?,
        )
        .ok_or_else(|| Error::MalformedHeader("IDX dimensions overflow".into()))?;
    if img_bytes.len() as u64 != expected {
        return Err(Error::TruncatedFile {
            path: images_path.display().to_string(),
            expected,
            found: img_bytes.len() as u64,
        });
    }

    if lbl_bytes.len() < 4 {
        return Err(Error::TruncatedFile {
            path: labels_path.display().to_string(),
            expected: 8,
            found: lbl_bytes.len() as u64,
        });
    }
    let magic = be_u32(&lbl_bytes, 0);
    if magic != LABELS_MAGIC {
        return Err(Error::BadMagic {
            expected: LABELS_MAGIC,
            found: magic,
        });
    }
    if lbl_bytes.len() < 8 {
        return Err(Error::TruncatedFile {
            path: labels_path.display().to_string(),
            expected: 8,
            found: lbl_bytes.len() as u64,
        });
    }
    let label_count = be_u32(&lbl_bytes, 4) as u64;
    if lbl_bytes.len() as u64 != 8 + label_count {
        return Err(Error::TruncatedFile {
            path: labels_path.display().to_string(),
            expected: 8 + label_count,
            found: lbl_bytes.len() as u64,
        });
    }
    if label_count != count {
        return Err(Error::CountMismatch {
            images: count as usize,
            labels: label_count as usize,
        });
    }

    let pixels_per_image = (rows * cols) as usize;
    let mut images = Vec::with_capacity(count as usize);
    for i in 0..count as usize {
        let start = 16 + i * pixels_per_image;
        let data = img_bytes[start..start + pixels_per_image].to_vec();
        images.push(ImageTensor::new(rows as u32, cols as u32, 1, data)?);
    }
    let mut labels = Vec::with_capacity(count as usize);
    for &b in &lbl_bytes[8..] {
        let label = b as u32;
        if label >= NUM_CLASSES {
            return Err(Error::LabelOutOfRange {
                label,
                num_classes: NUM_CLASSES,
            });
        }
        labels.push(label);
    }
    LabeledDataset::new(images, labels, NUM_CLASSES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    pub(crate) fn write_idx_pair(
        dir: &Path,
        count: u32,
        rows: u32,
        cols: u32,
    ) -> (std::path::PathBuf, std::path::PathBuf) {
        let img_path = dir.join("images.idx");
        let lbl_path = dir.join("labels.idx");
        let mut img = Vec::new();
        img.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
        img.extend_from_slice(&count.to_be_bytes());
        img.extend_from_slice(&rows.to_be_bytes());
        img.extend_from_slice(&cols.to_be_bytes());
        for i in 0..(count * rows * cols) {
            img.push((i % 256) as u8);
        }
        let mut lbl = Vec::new();
        lbl.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
        lbl.extend_from_slice(&count.to_be_bytes());
        for i in 0..count {
            lbl.push((i % 10) as u8);
        }
        fs::File::create(&img_path)
            .unwrap()
            .write_all(&img)
            .unwrap();
        fs::File::create(&lbl_path)
            .unwrap()
            .write_all(&lbl)
            .unwrap();
        (img_path, lbl_path)
    }

    #[test]
    fn loads_well_formed_pair() {
        let dir = tempfile::tempdir().unwrap();
        let (imgs, lbls) = write_idx_pair(dir.path(), 20, 28, 28);
        let ds = load_idx(&imgs, &lbls).unwrap();
        assert_eq!(ds.len(), 20);
        assert_eq!(ds.shape(), (28, 28, 1));
        assert_eq!(ds.label(3), 3);
    }

    #[test]
    fn rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let (imgs, lbls) = write_idx_pair(dir.path(), 2, 4, 4);
        // labels magic in the images slot
        assert!(matches!(
            load_idx(&lbls, &imgs),
            Err(Error::BadMagic { .. })
        ));
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let (imgs, lbls) = write_idx_pair(dir.path(), 2, 4, 4);
        let mut bytes = fs::read(&imgs).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&imgs, &bytes).unwrap();
        assert!(matches!(
            load_idx(&imgs, &lbls),
            Err(Error::TruncatedFile { .. })
        ));
    }

    #[test]
    fn rejects_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (imgs, _) = write_idx_pair(dir.path(), 2, 4, 4);
        let dir2 = tempfile::tempdir().unwrap();
        let (_, lbls) = write_idx_pair(dir2.path(), 3, 4, 4);
        assert!(matches!(
            load_idx(&imgs, &lbls),
            Err(Error::CountMismatch { .. })
        ));
    }
}
