//! Minimal IDX reader, just enough to pull two prototype digits out of the
//! MNIST training files.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::data::{Point, Seed};
use crate::error::{invalid, LabError, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| LabError::Truncated(format!("{what}: header ends early")))
}

#[derive(Debug, Clone)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let magic = be_u32(bytes, 0, "images")?;
        if magic != IMAGES_MAGIC {
            return Err(LabError::BadMagic { expected: IMAGES_MAGIC, found: magic });
        }
        let count = be_u32(bytes, 4, "images")? as usize;
        let rows = be_u32(bytes, 8, "images")? as usize;
        let cols = be_u32(bytes, 12, "images")? as usize;
        let need = count * rows * cols;
        let body = &bytes[16..];
        if body.len() < need {
            return Err(LabError::Truncated(format!(
                "images: expected {need} pixel bytes, found {}",
                body.len()
            )));
        }
        Ok(Self { count, rows, cols, pixels: body[..need].to_vec() })
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let sz = self.rows * self.cols;
        &self.pixels[i * sz..(i + 1) * sz]
    }
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0, "labels")?;
    if magic != LABELS_MAGIC {
        return Err(LabError::BadMagic { expected: LABELS_MAGIC, found: magic });
    }
    let count = be_u32(bytes, 4, "labels")? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(LabError::Truncated(format!(
            "labels: expected {count} bytes, found {}",
            body.len()
        )));
    }
    Ok(body[..count].to_vec())
}

/// One uniformly chosen image of each requested digit, scaled to `[0, 1]`
/// and flattened row-major.
pub fn load_mnist_prototypes(
    images_path: &Path,
    labels_path: &Path,
    digit_a: u8,
    digit_b: u8,
    seed: Seed,
) -> Result<(Point, Point)> {
    for d in [digit_a, digit_b] {
        if d > 9 {
            return Err(invalid(format!("digit {d} is not in 0..=9")));
        }
    }
    let images = IdxImages::parse(&fs::read(images_path)?)?;
    let labels = parse_labels(&fs::read(labels_path)?)?;
    if labels.len() != images.count {
        return Err(LabError::Format(format!(
            "{} images but {} labels",
            images.count,
            labels.len()
        )));
    }
    let mut rng = seed.rng();
    let mut pick = |digit: u8| -> Result<Point> {
        let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == digit).collect();
        if idx.is_empty() {
            return Err(LabError::DigitAbsent(digit));
        }
        let chosen = idx[rng.random_range(0..idx.len())];
        Point::new(images.image(chosen).iter().map(|&p| p as f64 / 255.0).collect())
    };
    let a = pick(digit_a)?;
    let b = pick(digit_b)?;
    Ok((a, b))
}
