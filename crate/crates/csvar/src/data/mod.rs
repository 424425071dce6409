//! Dataset ingestion, image file formats, epoch-variant persistence, and
//! client partitioning for the federated simulator.

mod cifar;
mod idx;
mod partition;
mod pnm;
mod variants;

pub use cifar::load_cifar_bin;
pub use idx::load_idx;
pub use partition::{partition_clients, ClientPartition};
pub use pnm::{read_image, read_image_bytes, write_image, write_image_bytes, write_variance_heatmap};
pub use variants::{generate_epoch_variants, DatasetManifest, VariantFile, VariantSet};

use crate::error::{Error, Result};
use crate::tensor::{reflect_pad_to_multiple, region_size, ImageTensor};

/// Images plus class labels; all images share one shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    images: Vec<ImageTensor>,
    labels: Vec<u32>,
    num_classes: u32,
}

impl LabeledDataset {
    pub fn new(images: Vec<ImageTensor>, labels: Vec<u32>, num_classes: u32) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::CountMismatch {
                images: images.len(),
                labels: labels.len(),
            });
        }
        if images.is_empty() {
            return Err(Error::InvalidShape("empty dataset".into()));
        }
        let shape = images[0].shape();
        if images.iter().any(|img| img.shape() != shape) {
            return Err(Error::InvalidShape(
                "all images in a dataset must share one shape".into(),
            ));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                num_classes,
            });
        }
        Ok(Self {
            images,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[ImageTensor] {
        &self.images
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn image(&self, i: usize) -> &ImageTensor {
        &self.images[i]
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    /// (height, width, channels) shared by every image.
    pub fn shape(&self) -> (u32, u32, u32) {
        self.images[0].shape()
    }

    /// New dataset holding the listed indices, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let images = indices.iter().map(|&i| self.images[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(images, labels, self.num_classes)
    }

    /// First `n` samples.
    pub fn take(&self, n: usize) -> Result<Self> {
        let n = n.min(self.len());
        let indices: Vec<usize> = (0..n).collect();
        self.subset(&indices)
    }

    /// Reflect-pad every image so both dimensions divide the adaptive
    /// region size of the original shape. MNIST's 28×28 becomes 32×32
    /// here, once, before any shuffling or training.
    pub fn pad_to_region_multiple(&self) -> Self {
        let (h, w, _) = self.shape();
        let s = region_size(h, w);
        if h % s == 0 && w % s == 0 {
            return self.clone();
        }
        let images = self
            .images
            .iter()
            .map(|img| reflect_pad_to_multiple(img, s))
            .collect();
        Self {
            images,
            labels: self.labels.clone(),
            num_classes: self.num_classes,
        }
    }
}
