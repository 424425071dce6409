//! Binary netpbm support: P5 (PGM) for grayscale, P6 (PPM) for color,
//! maxval 255 only. The writer emits a canonical header so write → read →
//! write round trips are byte-identical.

use crate::error::{Error, Result};
use crate::tensor::{ImageTensor, VarianceMap};
use std::fs;
use std::path::Path;

/// Encode an image as P5/P6 bytes depending on its channel count.
pub fn write_image_bytes(image: &ImageTensor) -> Vec<u8> {
    let magic = if image.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

pub fn write_image(image: &ImageTensor, path: &Path) -> Result<()> {
    fs::write(path, write_image_bytes(image))?;
    Ok(())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    /// Next whitespace-delimited token, skipping `#` comments.
    fn token(&mut self) -> Result<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader("unexpected end of header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self) -> Result<u32> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                Error::MalformedHeader(format!("expected number, found {:?}", tok))
            })
    }
}

/// Decode P5/P6 bytes. The payload length must match the header exactly.
pub fn read_image_bytes(bytes: &[u8]) -> Result<ImageTensor> {
    if bytes.len() < 2 {
        return Err(Error::MalformedHeader("file too short".into()));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1u32,
        b"P6" => 3u32,
        other => {
            return Err(Error::MalformedHeader(format!(
                "unsupported magic {:?}",
                other
            )))
        }
    };
    let mut cursor = HeaderCursor {
        bytes,
        pos: 2,
    };
    let width = cursor.number()?;
    let height = cursor.number()?;
    let maxval = cursor.number()?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero dimension".into()));
    }
    // exactly one whitespace byte separates the header from the payload
    let payload_start = cursor.pos + 1;
    let expected = width as usize * height as usize * channels as usize;
    let found = bytes.len().saturating_sub(payload_start);
    if found != expected {
        return Err(Error::TruncatedFile {
            path: "<pnm bytes>".into(),
            expected: expected as u64,
            found: found as u64,
        });
    }
    ImageTensor::new(height, width, channels, bytes[payload_start..].to_vec())
}

pub fn read_image(path: &Path) -> Result<ImageTensor> {
    let bytes = fs::read(path)?;
    read_image_bytes(&bytes).map_err(|e| match e {
        Error::TruncatedFile {
            expected, found, ..
        } => Error::TruncatedFile {
            path: path.display().to_string(),
            expected,
            found,
        },
        other => other,
    })
}

/// Render a variance map as a PGM heatmap, one pixel per region, min–max
/// normalized so the most variant region is white. A map whose entries are
/// all equal renders as uniform mid-gray (128).
pub fn write_variance_heatmap(vmap: &VarianceMap, path: &Path) -> Result<()> {
    let min = vmap.min();
    let max = vmap.max();
    let data: Vec<u8> = vmap
        .values()
        .iter()
        .map(|&v| {
            if max > min {
                ((v - min) / (max - min) * 255.0).round() as u8
            } else {
                128
            }
        })
        .collect();
    let img = ImageTensor::new(vmap.rows(), vmap.cols(), 1, data)?;
    write_image(&img, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::partition_regions;

    #[test]
    fn round_trip_is_exact() {
        let img = crate::synth::natural_image(24, 16, 3, 44);
        let bytes = write_image_bytes(&img);
        let back = read_image_bytes(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(write_image_bytes(&back), bytes);
    }

    #[test]
    fn tiny_pgm_layout() {
        let img = ImageTensor::new(2, 2, 1, vec![1, 2, 3, 4]).unwrap();
        let bytes = write_image_bytes(&img);
        assert!(bytes.starts_with(b"P5"));
        assert_eq!(&bytes[bytes.len() - 4..], &[1, 2, 3, 4]);
        assert_eq!(read_image_bytes(&bytes).unwrap(), img);
    }

    #[test]
    fn rejects_large_maxval() {
        let bytes = b"P6\n2 2\n65535\n".to_vec();
        assert!(matches!(
            read_image_bytes(&bytes),
            Err(Error::UnsupportedMaxval(65535))
        ));
    }

    #[test]
    fn rejects_garbage_header() {
        assert!(read_image_bytes(b"P7\n1 1\n255\nx").is_err());
        assert!(read_image_bytes(b"P5\nab cd\n255\nx").is_err());
        assert!(read_image_bytes(b"P5\n2 2\n255\nxy").is_err()); // short payload
    }

    #[test]
    fn heatmap_normalization() {
        let dir = tempfile::tempdir().unwrap();

        // all-equal map -> uniform 128
        let img = ImageTensor::filled(16, 16, 1, 7).unwrap();
        let grid = partition_regions(&img, 8).unwrap();
        let vmap = crate::tensor::variance_map(&img, &grid).unwrap();
        let path = dir.path().join("flat.pgm");
        write_variance_heatmap(&vmap, &path).unwrap();
        let heat = read_image(&path).unwrap();
        assert!(heat.data().iter().all(|&v| v == 128));

        // min maps to 0, max to 255
        let (scene, _) = crate::synth::subject_scene(32, 32, 1, 1);
        let grid = partition_regions(&scene, 8).unwrap();
        let vmap = crate::tensor::variance_map(&scene, &grid).unwrap();
        let path = dir.path().join("scene.pgm");
        write_variance_heatmap(&vmap, &path).unwrap();
        let heat = read_image(&path).unwrap();
        assert!(heat.data().contains(&0));
        assert!(heat.data().contains(&255));
    }
}
