//! CIFAR-10 binary loader: 3073-byte records, one label byte followed by
//! 32×32 red, green, and blue planes.

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::tensor::ImageTensor;
use std::fs;
use std::path::Path;

const RECORD_LEN: usize = 3073;
const PLANE: usize = 32 * 32;
const NUM_CLASSES: u32 = 10;

/// Load one or more CIFAR-10 batch files, converting the planar channel
/// layout to the interleaved layout of [`ImageTensor`].
pub fn load_cifar_bin<P: AsRef<Path>>(paths: &[P]) -> Result<LabeledDataset> {
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        if bytes.is_empty() || bytes.len() % RECORD_LEN != 0 {
            let records = bytes.len() / RECORD_LEN;
            return Err(Error::TruncatedFile {
                path: path.display().to_string(),
                expected: ((records + 1) * RECORD_LEN) as u64,
                found: bytes.len() as u64,
            });
        }
        for record in bytes.chunks_exact(RECORD_LEN) {
            let label = record[0] as u32;
            if label >= NUM_CLASSES {
                return Err(Error::LabelOutOfRange {
                    label,
                    num_classes: NUM_CLASSES,
                });
            }
            let planes = &record[1..];
            let mut data = Vec::with_capacity(PLANE * 3);
            for p in 0..PLANE {
                data.push(planes[p]);
                data.push(planes[PLANE + p]);
                data.push(planes[2 * PLANE + p]);
            }
            images.push(ImageTensor::new(32, 32, 3, data)?);
            labels.push(label);
        }
    }
    LabeledDataset::new(images, labels, NUM_CLASSES)
}
