//! MNIST IDX files: big-endian u32 header words followed by unsigned bytes.

use std::path::Path;

use super::{Dataset, Sample};
use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], word: usize) -> Option<u32> {
    let b = bytes.get(word * 4..word * 4 + 4)?;
    Some(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

/// Returns `(count, rows, cols, pixels)`.
pub fn parse_idx_images<'a>(bytes: &'a [u8], path: &Path) -> Result<(usize, usize, usize, &'a [u8])> {
    let header = |w| read_u32(bytes, w).ok_or_else(|| Error::format(path, "truncated IDX header"));
    let magic = header(0)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::format(path, format!("bad image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}")));
    }
    let (n, rows, cols) = (header(1)? as usize, header(2)? as usize, header(3)? as usize);
    let body = &bytes[16..];
    let expected = n * rows * cols;
    if body.len() != expected {
        return Err(Error::format(path, format!("expected {expected} pixel bytes, found {}", body.len())));
    }
    Ok((n, rows, cols, body))
}

pub fn parse_idx_labels<'a>(bytes: &'a [u8], path: &Path) -> Result<&'a [u8]> {
    let header = |w| read_u32(bytes, w).ok_or_else(|| Error::format(path, "truncated IDX header"));
    let magic = header(0)?;
    if magic != LABELS_MAGIC {
        return Err(Error::format(path, format!("bad label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}")));
    }
    let n = header(1)? as usize;
    let body = &bytes[8..];
    if body.len() != n {
        return Err(Error::format(path, format!("expected {n} label bytes, found {}", body.len())));
    }
    Ok(body)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn append_pair(samples: &mut Vec<Sample>, images: &Path, labels: &Path) -> Result<()> {
    let img_bytes = read(images)?;
    let lbl_bytes = read(labels)?;
    let (n, rows, cols, pixels) = parse_idx_images(&img_bytes, images)?;
    let lbls = parse_idx_labels(&lbl_bytes, labels)?;
    if lbls.len() != n {
        return Err(Error::format(labels, format!("{} labels for {n} images in {}", lbls.len(), images.display())));
    }
    let m = rows * cols;
    if m == 0 {
        return Err(Error::format(images, "images have zero pixels"));
    }
    samples.reserve(n);
    for (chunk, &label) in pixels.chunks_exact(m).zip(lbls) {
        if label >= 10 {
            return Err(Error::format(labels, format!("label {label} is not a digit")));
        }
        samples.push(Sample {
            features: chunk.iter().map(|&p| f64::from(p) / 255.0).collect(),
            label: usize::from(label),
            person: None,
        });
    }
    Ok(())
}

/// Loads one images/labels pair. Pixels are scaled to [0, 1].
pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset> {
    load_idx_pairs(&[(images, labels)])
}

/// Concatenates several images/labels pairs (e.g. MNIST train and test).
pub fn load_idx_pairs<P: AsRef<Path>>(pairs: &[(P, P)]) -> Result<Dataset> {
    let mut samples = Vec::new();
    for (images, labels) in pairs {
        append_pair(&mut samples, images.as_ref(), labels.as_ref())?;
    }
    let first = pairs.first().map(|(p, _)| p.as_ref().to_path_buf()).unwrap_or_default();
    if samples.is_empty() {
        return Err(Error::format(first, "IDX files contain no samples"));
    }
    let len = samples[0].features.len();
    if samples.iter().any(|s| s.features.len() != len) {
        return Err(Error::format(first, "IDX image sizes differ between files"));
    }
    Dataset::new("idx", samples, Some(10))
}

/// Writes an IDX image file and its label file.
pub fn write_idx(
    images: &Path,
    labels: &Path,
    rows: usize,
    cols: usize,
    pixels: &[u8],
    label_bytes: &[u8],
) -> Result<()> {
    let n = label_bytes.len();
    if pixels.len() != n * rows * cols {
        return Err(Error::InvalidDimension(format!("{} pixel bytes for {n} images of {rows}x{cols}", pixels.len())));
    }
    let mut img = Vec::with_capacity(16 + pixels.len());
    for w in [IMAGES_MAGIC, n as u32, rows as u32, cols as u32] {
        img.extend_from_slice(&w.to_be_bytes());
    }
    img.extend_from_slice(pixels);
    let mut lbl = Vec::with_capacity(8 + n);
    for w in [LABELS_MAGIC, n as u32] {
        lbl.extend_from_slice(&w.to_be_bytes());
    }
    lbl.extend_from_slice(label_bytes);
    std::fs::write(images, img).map_err(|e| Error::io(images, e))?;
    std::fs::write(labels, lbl).map_err(|e| Error::io(labels, e))
}
