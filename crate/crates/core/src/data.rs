//! Shared domain types: points, labeled samples, datasets, seeds, and the
//! small integer/bit helpers the parity concepts are built from.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// A point in R^d with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("point dimension must be at least 1"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(invalid(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Construction for coordinates that are finite by construction.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Self(coords)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Point,
    pub y: usize,
    /// Set when label noise replaced the ground-truth label. Metadata only.
    pub flipped: bool,
}

/// An ordered collection of samples sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
    dim: usize,
    num_classes: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, dim: usize, num_classes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dataset dimension must be at least 1"));
        }
        if num_classes < 2 {
            return Err(invalid("a dataset needs at least two classes"));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.x.dim() != dim {
                return Err(LabError::DimensionMismatch { expected: dim, got: s.x.dim() });
            }
            if s.y >= num_classes {
                return Err(LabError::OutOfRange(format!(
                    "sample {i} has label {} but only {num_classes} classes are declared",
                    s.y
                )));
            }
        }
        Ok(Self { samples, dim, num_classes })
    }

    /// Builds a dataset of clean (unflipped) samples.
    pub fn from_points(
        points: Vec<Point>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(invalid("points and labels differ in length"));
        }
        let dim = points.first().map_or(1, Point::dim);
        let samples = points
            .into_iter()
            .zip(labels)
            .map(|(x, y)| Sample { x, y, flipped: false })
            .collect();
        Self::new(samples, dim, num_classes)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.y).collect()
    }

    pub fn flipped_count(&self) -> usize {
        self.samples.iter().filter(|s| s.flipped).count()
    }

    /// The learner-facing view: coordinates and labels, no provenance flags.
    pub fn view(&self) -> TrainView<'_> {
        TrainView { ds: self }
    }

    /// Same points and flags under a new label assignment.
    pub fn relabeled(&self, labels: &[usize], num_classes: usize) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(invalid("label vector length differs from dataset length"));
        }
        let samples = self
            .samples
            .iter()
            .zip(labels)
            .map(|(s, &y)| Sample { x: s.x.clone(), y, flipped: s.flipped })
            .collect();
        Self::new(samples, self.dim, num_classes)
    }

    /// Writes the `x0,...,x{d-1},y,flipped` CSV form. Coordinates carry 17
    /// significant digits so every f64 survives a round trip.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = String::new();
        for i in 0..self.dim {
            let _ = write!(line, "x{i},");
        }
        line.push_str("y,flipped\n");
        w.write_all(line.as_bytes())?;
        for s in &self.samples {
            line.clear();
            for c in s.x.iter() {
                let _ = write!(line, "{c:.16e},");
            }
            let _ = writeln!(line, "{},{}", s.y, u8::from(s.flipped));
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, num_classes: usize) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| LabError::Format("empty dataset file".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 3 || cols[cols.len() - 2] != "y" || cols[cols.len() - 1] != "flipped" {
            return Err(LabError::Format(format!("unexpected header `{header}`")));
        }
        let dim = cols.len() - 2;
        for (i, c) in cols[..dim].iter().enumerate() {
            if *c != format!("x{i}") {
                return Err(LabError::Format(format!("unexpected column `{c}`")));
            }
        }
        let mut samples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != dim + 2 {
                return Err(LabError::Format(format!("row {} has {} fields", lineno + 1, fields.len())));
            }
            let parse_err = |f: &str| LabError::Format(format!("row {}: bad field `{f}`", lineno + 1));
            let coords = fields[..dim]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| parse_err(f)))
                .collect::<Result<Vec<_>>>()?;
            let y = fields[dim].parse::<usize>().map_err(|_| parse_err(fields[dim]))?;
            let flipped = match fields[dim + 1] {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(other)),
            };
            samples.push(Sample { x: Point::new(coords)?, y, flipped });
        }
        Self::new(samples, dim, num_classes)
    }
}

/// Read-only access to a dataset that hides noise provenance.
#[derive(Clone, Copy)]
pub struct TrainView<'a> {
    ds: &'a Dataset,
}

impl<'a> TrainView<'a> {
    pub fn len(&self) -> usize {
        self.ds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ds.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ds.dim
    }

    pub fn num_classes(&self) -> usize {
        self.ds.num_classes
    }

    pub fn x(&self, i: usize) -> &'a [f64] {
        &self.ds.samples[i].x
    }

    pub fn y(&self, i: usize) -> usize {
        self.ds.samples[i].y
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&'a [f64], usize)> + 'a {
        self.ds.samples.iter().map(|s| (s.x.coords(), s.y))
    }
}

/// Seed for a deterministic ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Seed for trial `i` of a sweep: `base XOR i`.
    pub fn trial(self, i: u64) -> Seed {
        Seed(self.0 ^ i)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// An independent ChaCha stream under the same key, for sub-tasks of one
    /// operation (e.g. sampling and then noise injection).
    pub fn stream(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Flips each binary label independently with probability `eta`.
pub fn inject_label_noise(ds: &Dataset, eta: f64, seed: Seed) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("noise rate {eta} outside [0, 1]")));
    }
    if ds.num_classes != 2 {
        return Err(invalid("label noise injection needs a binary dataset"));
    }
    let mut rng = seed.rng();
    let samples = ds
        .samples
        .iter()
        .map(|s| {
            // random() is in [0, 1): eta = 0 never flips, eta = 1 always does.
            let flip = rng.random::<f64>() < eta;
            Sample {
                x: s.x.clone(),
                y: if flip { 1 - s.y } else { s.y },
                flipped: flip,
            }
        })
        .collect();
    Ok(Dataset { samples, dim: ds.dim, num_classes: 2 })
}

/// Nearest integer, halves rounded away from zero.
pub fn round_nearest(x: f64) -> Result<i64> {
    if !x.is_finite() {
        return Err(invalid(format!("cannot round non-finite value {x}")));
    }
    let r = x.round();
    if r.abs() >= 9.0e18 {
        return Err(LabError::OutOfRange(format!("{x} does not fit in a 64-bit integer")));
    }
    Ok(r as i64)
}

/// Little-endian binary encoding: index 0 holds the least significant bit.
pub fn bits_of(i: u64, n: u32) -> Result<Vec<bool>> {
    if n < 64 && i >> n != 0 {
        return Err(LabError::OutOfRange(format!("{i} needs more than {n} bits")));
    }
    Ok((0..n).map(|b| b < 64 && (i >> b) & 1 == 1).collect())
}

/// Inverse of [`bits_of`].
pub fn int_from_bits(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0u64, |acc, (k, _)| acc | (1u64 << k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line_dataset(m: usize) -> Dataset {
        let pts = (0..m).map(|i| Point::new(vec![i as f64 * 0.5]).unwrap()).collect();
        let labels = (0..m).map(|i| i % 2).collect();
        Dataset::from_points(pts, labels, 2).unwrap()
    }

    #[test]
    fn point_rejects_non_finite_and_empty() {
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn dataset_validates_labels_and_dims() {
        let a = Point::new(vec![0.0]).unwrap();
        let b = Point::new(vec![0.0, 1.0]).unwrap();
        assert!(Dataset::from_points(vec![a.clone(), b], vec![0, 1], 2).is_err());
        assert!(Dataset::from_points(vec![a.clone()], vec![2], 2).is_err());
        assert!(Dataset::from_points(vec![a], vec![0], 1).is_err());
    }

    #[test]
    fn zero_noise_keeps_labels() {
        let ds = line_dataset(100);
        let noisy = inject_label_noise(&ds, 0.0, Seed(3)).unwrap();
        assert_eq!(noisy.labels(), ds.labels());
        assert_eq!(noisy.flipped_count(), 0);
    }

    #[test]
    fn certain_noise_flips_everything() {
        let ds = line_dataset(100);
        let noisy = inject_label_noise(&ds, 1.0, Seed(3)).unwrap();
        for (a, b) in ds.samples().iter().zip(noisy.samples()) {
            assert_eq!(a.y, 1 - b.y);
            assert!(b.flipped);
        }
    }

    #[test]
    fn half_noise_flips_about_half() {
        // Binomial(10000, 0.5): 4 sigma = 200.
        let ds = line_dataset(10_000);
        let noisy = inject_label_noise(&ds, 0.5, Seed(17)).unwrap();
        let frac = noisy.flipped_count() as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&frac), "flipped fraction {frac}");
        for (a, b) in ds.samples().iter().zip(noisy.samples()) {
            assert_eq!(a.x, b.x);
            assert_eq!(b.flipped, a.y != b.y);
        }
    }

    #[test]
    fn noise_rate_is_validated() {
        let ds = line_dataset(4);
        assert!(inject_label_noise(&ds, -0.1, Seed(0)).is_err());
        assert!(inject_label_noise(&ds, 1.5, Seed(0)).is_err());
        let three = ds.relabeled(&[0, 1, 2, 0], 3).unwrap();
        assert!(inject_label_noise(&three, 0.1, Seed(0)).is_err());
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(round_nearest(2.9).unwrap(), 3);
        assert_eq!(round_nearest(3.1).unwrap(), 3);
        assert_eq!(round_nearest(2.5).unwrap(), 3);
        assert_eq!(round_nearest(-2.5).unwrap(), -3);
        assert!(round_nearest(f64::NAN).is_err());
        assert!(round_nearest(f64::INFINITY).is_err());
    }

    #[test]
    fn bit_examples() {
        assert_eq!(bits_of(3, 3).unwrap(), vec![true, true, false]);
        assert_eq!(bits_of(0, 4).unwrap(), vec![false; 4]);
        assert_eq!(bits_of(4, 3).unwrap(), vec![false, false, true]);
        assert!(bits_of(8, 3).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let pts = vec![
            Point::new(vec![0.1, -1.0 / 3.0]).unwrap(),
            Point::new(vec![f64::MIN_POSITIVE, 1e300]).unwrap(),
        ];
        let ds = Dataset::from_points(pts, vec![1, 0], 2).unwrap();
        let ds = inject_label_noise(&ds, 1.0, Seed(1)).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,y,flipped\n"));
        let back = Dataset::read_csv(&buf[..], 2).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(Dataset::read_csv(&b"a,b,c\n1,0,0\n"[..], 2).is_err());
    }

    proptest! {
        #[test]
        fn bits_round_trip(n in 1u32..=63, raw in any::<u64>()) {
            let i = raw & ((1u64 << n) - 1);
            prop_assert_eq!(int_from_bits(&bits_of(i, n).unwrap()), i);
        }

        #[test]
        fn noise_is_deterministic(seed in any::<u64>(), eta in 0.0f64..=1.0) {
            let ds = line_dataset(50);
            let a = inject_label_noise(&ds, eta, Seed(seed)).unwrap();
            let b = inject_label_noise(&ds, eta, Seed(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
