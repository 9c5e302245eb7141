//! Exact generative models for the synthetic distributions, each with a
//! sampler and a ground-truth label function.

use std::f64::consts::{PI, SQRT_2};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{inject_label_noise, round_nearest, Dataset, Point, Sample, Seed};
use crate::error::{invalid, LabError, Result};

/// Uniform point in the disk of radius `r` around `center` (polar method).
fn uniform_in_disk<R: Rng>(rng: &mut R, center: [f64; 2], r: f64) -> [f64; 2] {
    let rho = r * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    [center[0] + rho * theta.cos(), center[1] + rho * theta.sin()]
}

/// Uniform draw from the open interval `(lo, hi)`.
fn uniform_open<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let x = lo + (hi - lo) * rng.random::<f64>();
        if x > lo && x < hi {
            return x;
        }
    }
}

// ---------------------------------------------------------------------------
// Interval parity

/// Uniform over `(j - 1/4, j + 1/4)` for `j` in `zeta`; the label of a point
/// is the parity of the bits in `set` of its nearest integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalParityModel {
    n: u32,
    set: Vec<u32>,
    zeta: Vec<u64>,
}

pub const INTERVAL_HALF_WIDTH: f64 = 0.25;

impl IntervalParityModel {
    pub fn new(n: u32, mut set: Vec<u32>, mut zeta: Vec<u64>) -> Result<Self> {
        if !(1..=62).contains(&n) {
            return Err(invalid(format!("bit width {n} outside 1..=62")));
        }
        set.sort_unstable();
        set.dedup();
        if let Some(&b) = set.iter().find(|&&b| b >= n) {
            return Err(invalid(format!("parity index {b} outside 0..{n}")));
        }
        zeta.sort_unstable();
        zeta.dedup();
        if zeta.is_empty() {
            return Err(invalid("support set zeta is empty"));
        }
        let top = (1u64 << n) - 1;
        if let Some(&j) = zeta.iter().find(|&&j| j == 0 || j > top) {
            return Err(invalid(format!("support center {j} outside 1..={top}")));
        }
        Ok(Self { n, set, zeta })
    }

    /// Random parity set (each index kept with probability 1/2) and
    /// `zeta_size` distinct centers from `1..2^n`.
    pub fn random(n: u32, zeta_size: usize, seed: Seed) -> Result<Self> {
        if !(1..=62).contains(&n) {
            return Err(invalid(format!("bit width {n} outside 1..=62")));
        }
        let top = (1u64 << n) - 1;
        if zeta_size == 0 || zeta_size as u64 > top {
            return Err(invalid(format!("cannot pick {zeta_size} centers from 1..={top}")));
        }
        let mut rng = seed.rng();
        let set = (0..n).filter(|_| rng.random::<bool>()).collect();
        let zeta = if top <= 1 << 24 {
            index::sample(&mut rng, top as usize, zeta_size)
                .into_iter()
                .map(|i| i as u64 + 1)
                .collect()
        } else {
            let mut picked = std::collections::BTreeSet::new();
            while picked.len() < zeta_size {
                picked.insert(rng.random_range(1..=top));
            }
            picked.into_iter().collect()
        };
        Self::new(n, set, zeta)
    }

    /// Default support size of `2n`.
    pub fn random_default(n: u32, seed: Seed) -> Result<Self> {
        Self::random(n, 2 * n as usize, seed)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn parity_set(&self) -> &[u32] {
        &self.set
    }

    pub fn zeta(&self) -> &[u64] {
        &self.zeta
    }

    pub fn domain_max(&self) -> f64 {
        (1u64 << self.n) as f64
    }

    /// Parity label of an integer. Only the low `n` bits are read, so the
    /// right end of the domain (`2^n`) reads as all zeros.
    pub fn label_of_integer(&self, k: i64) -> usize {
        parity_of_integer(k, &self.set, self.n)
    }

    /// Ground-truth label on `[0, 2^n]`.
    pub fn true_label(&self, x: f64) -> Result<usize> {
        if !x.is_finite() || x < 0.0 || x > self.domain_max() {
            return Err(LabError::OutOfRange(format!(
                "{x} outside the domain [0, {}]",
                self.domain_max()
            )));
        }
        Ok(self.label_of_integer(round_nearest(x)?))
    }

    pub fn support_interval(j: u64) -> (f64, f64) {
        (j as f64 - INTERVAL_HALF_WIDTH, j as f64 + INTERVAL_HALF_WIDTH)
    }

    pub fn on_support(&self, x: f64) -> bool {
        let Ok(k) = round_nearest(x) else { return false };
        k > 0 && self.zeta.binary_search(&(k as u64)).is_ok() && (x - k as f64).abs() < INTERVAL_HALF_WIDTH
    }

    pub fn sample(&self, m: usize, seed: Seed) -> Result<Dataset> {
        if m == 0 {
            return Err(invalid("sample size must be at least 1"));
        }
        let mut rng = seed.rng();
        let samples = (0..m)
            .map(|_| {
                let j = self.zeta[rng.random_range(0..self.zeta.len())];
                let (lo, hi) = Self::support_interval(j);
                let x = uniform_open(&mut rng, lo, hi);
                Sample {
                    x: Point::from_vec_unchecked(vec![x]),
                    y: self.label_of_integer(j as i64),
                    flipped: false,
                }
            })
            .collect();
        Dataset::new(samples, 1, 2)
    }
}

pub(crate) fn parity_of_integer(k: i64, set: &[u32], n: u32) -> usize {
    let bits = (k as u64) & if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    (set.iter().filter(|&&b| (bits >> b) & 1 == 1).count() % 2) as usize
}

pub fn true_label_cs(model: &IntervalParityModel, x: f64) -> Result<usize> {
    model.true_label(x)
}

pub fn sample_interval_parity(model: &IntervalParityModel, m: usize, seed: Seed) -> Result<Dataset> {
    model.sample(m, seed)
}

// ---------------------------------------------------------------------------
// Parity balls

/// The (r, k) one-bit parity model: disks of radius `r` around `(i + t, i)`
/// for `i` in `1..=k`, `t` in `{0, 1}`, labeled `(t + b) mod 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityBallModel {
    r: f64,
    k: usize,
    b: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
    pub label: usize,
    /// Component id `2 (i - 1) + t`.
    pub component: usize,
}

impl ParityBallModel {
    pub fn new(r: f64, k: usize, b: u8) -> Result<Self> {
        if !(r > 0.0 && r < 1.0 / SQRT_2) {
            return Err(invalid(format!("ball radius {r} outside (0, 1/sqrt 2)")));
        }
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if b > 1 {
            return Err(invalid("orientation bit must be 0 or 1"));
        }
        Ok(Self { r, k, b })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn orientation(&self) -> u8 {
        self.b
    }

    pub fn balls(&self) -> Vec<Ball> {
        (1..=self.k)
            .flat_map(|i| {
                (0..2usize).map(move |t| (i, t))
            })
            .map(|(i, t)| Ball {
                center: [(i + t) as f64, i as f64],
                radius: self.r,
                label: (t + self.b as usize) % 2,
                component: 2 * (i - 1) + t,
            })
            .collect()
    }

    pub fn num_components(&self) -> usize {
        2 * self.k
    }

    /// Label of the support ball containing `x`.
    pub fn label(&self, x: &[f64]) -> Result<usize> {
        if x.len() != 2 {
            return Err(LabError::DimensionMismatch { expected: 2, got: x.len() });
        }
        let nearest = self
            .balls()
            .into_iter()
            .map(|ball| (ball, (x[0] - ball.center[0]).hypot(x[1] - ball.center[1])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one ball");
        if nearest.1 > self.r {
            return Err(LabError::NotOnSupport);
        }
        Ok(nearest.0.label)
    }

    /// Samples plus the generating component of each sample.
    pub fn sample_with_components(&self, m: usize, seed: Seed) -> Result<(Dataset, Vec<usize>)> {
        if m == 0 {
            return Err(invalid("sample size must be at least 1"));
        }
        let mut rng = seed.rng();
        let mut comps = Vec::with_capacity(m);
        let samples = (0..m)
            .map(|_| {
                let t = rng.random_range(0..2usize);
                let i = rng.random_range(1..=self.k);
                let center = [(i + t) as f64, i as f64];
                let p = uniform_in_disk(&mut rng, center, self.r);
                comps.push(2 * (i - 1) + t);
                Sample {
                    x: Point::from_vec_unchecked(p.to_vec()),
                    y: (t + self.b as usize) % 2,
                    flipped: false,
                }
            })
            .collect();
        Ok((Dataset::new(samples, 2, 2)?, comps))
    }

    pub fn sample(&self, m: usize, seed: Seed) -> Result<Dataset> {
        Ok(self.sample_with_components(m, seed)?.0)
    }
}

pub fn parity_ball_label(model: &ParityBallModel, x: &[f64]) -> Result<usize> {
    model.label(x)
}

pub fn sample_parity_balls(model: &ParityBallModel, m: usize, seed: Seed) -> Result<Dataset> {
    model.sample(m, seed)
}

// ---------------------------------------------------------------------------
// Blobs

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
    pub label: usize,
}

impl Circle {
    pub fn contains(&self, x: &[f64]) -> bool {
        (x[0] - self.center[0]).hypot(x[1] - self.center[1]) <= self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

/// Points uniform on non-overlapping disks, one label per disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobWorld {
    circles: Vec<Circle>,
    /// Per-circle sampling weights; proportional to area when absent.
    weights: Option<Vec<f64>>,
    num_classes: usize,
}

impl BlobWorld {
    pub fn new(circles: Vec<Circle>, weights: Option<Vec<f64>>) -> Result<Self> {
        if circles.is_empty() {
            return Err(invalid("a blob world needs at least one circle"));
        }
        for (i, c) in circles.iter().enumerate() {
            if !(c.radius > 0.0 && c.radius.is_finite()) || !c.center.iter().all(|v| v.is_finite()) {
                return Err(invalid(format!("circle {i} has a bad center or radius")));
            }
            for (j, d) in circles.iter().enumerate().skip(i + 1) {
                let dist = (c.center[0] - d.center[0]).hypot(c.center[1] - d.center[1]);
                if dist <= c.radius + d.radius {
                    return Err(invalid(format!("circles {i} and {j} overlap")));
                }
            }
        }
        if let Some(w) = &weights {
            if w.len() != circles.len() {
                return Err(invalid("one weight per circle is required"));
            }
            if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) || w.iter().sum::<f64>() <= 0.0 {
                return Err(invalid("weights must be non-negative with a positive sum"));
            }
        }
        let num_classes = circles.iter().map(|c| c.label).max().unwrap_or(0).max(1) + 1;
        Ok(Self { circles, weights, num_classes })
    }

    pub fn circles(&self) -> &[Circle] {
        &self.circles
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn effective_weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.clone(),
            None => self.circles.iter().map(Circle::area).collect(),
        }
    }

    /// Index of the circle containing `x`, if any.
    pub fn circle_of(&self, x: &[f64]) -> Option<usize> {
        self.circles.iter().position(|c| c.contains(x))
    }

    pub fn sample_with_components(&self, m: usize, seed: Seed) -> Result<(Dataset, Vec<usize>)> {
        if m == 0 {
            return Err(invalid("sample size must be at least 1"));
        }
        let chooser = WeightedIndex::new(self.effective_weights())
            .map_err(|e| invalid(format!("bad circle weights: {e}")))?;
        let mut rng = seed.rng();
        let mut comps = Vec::with_capacity(m);
        let samples = (0..m)
            .map(|_| {
                let ci = chooser.sample(&mut rng);
                let c = self.circles[ci];
                comps.push(ci);
                Sample {
                    x: Point::from_vec_unchecked(uniform_in_disk(&mut rng, c.center, c.radius).to_vec()),
                    y: c.label,
                    flipped: false,
                }
            })
            .collect();
        Ok((Dataset::new(samples, 2, self.num_classes)?, comps))
    }

    pub fn sample(&self, m: usize, seed: Seed) -> Result<Dataset> {
        Ok(self.sample_with_components(m, seed)?.0)
    }
}

pub fn sample_blobs(world: &BlobWorld, m: usize, seed: Seed) -> Result<Dataset> {
    world.sample(m, seed)
}

// ---------------------------------------------------------------------------
// Prototype noise

/// Two prototypes plus isotropic Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeNoiseModel {
    p0: Point,
    p1: Point,
    sigma: f64,
}

impl PrototypeNoiseModel {
    pub fn new(p0: Point, p1: Point, sigma: f64) -> Result<Self> {
        if p0.dim() != p1.dim() {
            return Err(LabError::DimensionMismatch { expected: p0.dim(), got: p1.dim() });
        }
        if p0 == p1 {
            return Err(invalid("prototypes must differ"));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("noise scale {sigma} must be finite and >= 0")));
        }
        Ok(Self { p0, p1, sigma })
    }

    pub fn dim(&self) -> usize {
        self.p0.dim()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn prototype(&self, class: usize) -> &Point {
        if class == 0 {
            &self.p0
        } else {
            &self.p1
        }
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.p0.clone(), self.p1.clone(), sigma)
    }

    /// Uniform class, prototype plus N(0, sigma^2) per coordinate, then
    /// label noise at rate `eta`.
    pub fn sample(&self, m: usize, eta: f64, seed: Seed) -> Result<Dataset> {
        if m == 0 {
            return Err(invalid("sample size must be at least 1"));
        }
        let mut rng = seed.rng();
        let samples = (0..m)
            .map(|_| {
                let y = rng.random_range(0..2usize);
                let coords = self
                    .prototype(y)
                    .iter()
                    .map(|&p| {
                        let z: f64 = rng.sample(StandardNormal);
                        p + self.sigma * z
                    })
                    .collect();
                Sample { x: Point::from_vec_unchecked(coords), y, flipped: false }
            })
            .collect();
        let clean = Dataset::new(samples, self.dim(), 2)?;
        inject_label_noise(&clean, eta, Seed(rng.random()))
    }
}

pub fn sample_prototype(model: &PrototypeNoiseModel, m: usize, eta: f64, seed: Seed) -> Result<Dataset> {
    model.sample(m, eta, seed)
}

/// Orthogonal indicator prototypes in `[0, 1]^dim`: class 0 lights the first
/// half of the coordinates, class 1 the second half.
pub fn synthetic_prototypes(dim: usize) -> Result<(Point, Point)> {
    if dim < 2 {
        return Err(invalid("synthetic prototypes need at least two dimensions"));
    }
    let half = dim / 2;
    let p0 = (0..dim).map(|i| if i < half { 1.0 } else { 0.0 }).collect();
    let p1 = (0..dim).map(|i| if i < half { 0.0 } else { 1.0 }).collect();
    Ok((Point::from_vec_unchecked(p0), Point::from_vec_unchecked(p1)))
}

pub const SYNTHETIC_PROTOTYPE_DIM: usize = 64;

#[cfg(test)]
mod tests {
    use super::*;

    fn thm_model() -> IntervalParityModel {
        IntervalParityModel::new(3, vec![0, 2], vec![1, 2, 3, 5]).unwrap()
    }

    #[test]
    fn interval_label_examples() {
        let m = thm_model();
        // 3 = 011b: bit0 = 1, bit2 = 0 -> odd.
        assert_eq!(m.true_label(2.9).unwrap(), 1);
        let empty = IntervalParityModel::new(3, vec![], vec![1]).unwrap();
        for x in [0.0, 1.3, 4.1, 7.9] {
            assert_eq!(empty.true_label(x).unwrap(), 0);
        }
        let s1 = IntervalParityModel::new(3, vec![1], vec![4]).unwrap();
        assert_eq!(s1.true_label(4.1).unwrap(), 0);
        assert!(m.true_label(-0.1).is_err());
        assert!(m.true_label(8.5).is_err());
        assert_eq!(m.true_label(8.0).unwrap(), 0);
    }

    #[test]
    fn interval_model_validation() {
        assert!(IntervalParityModel::new(3, vec![3], vec![1]).is_err());
        assert!(IntervalParityModel::new(3, vec![0], vec![]).is_err());
        assert!(IntervalParityModel::new(3, vec![0], vec![0]).is_err());
        assert!(IntervalParityModel::new(3, vec![0], vec![8]).is_err());
        assert!(IntervalParityModel::random(2, 4, Seed(0)).is_err());
        let r = IntervalParityModel::random_default(8, Seed(5)).unwrap();
        assert_eq!(r.zeta().len(), 16);
    }

    #[test]
    fn interval_samples_on_support_and_labeled() {
        let m = thm_model();
        let ds = m.sample(2000, Seed(1)).unwrap();
        for s in ds.samples() {
            let x = s.x[0];
            assert!((x - round_nearest(x).unwrap() as f64).abs() < 0.25);
            assert!(m.on_support(x));
            assert_eq!(s.y, m.true_label(x).unwrap());
        }
    }

    #[test]
    fn interval_counts_are_balanced() {
        // Multinomial(10000, 1/4): sd = 43.3, 4 sd ~ 173 around 2500.
        let m = thm_model();
        let ds = m.sample(10_000, Seed(2)).unwrap();
        for &j in m.zeta() {
            let c = ds.samples().iter().filter(|s| round_nearest(s.x[0]).unwrap() as u64 == j).count();
            assert!((2200..=2800).contains(&c), "interval {j}: {c}");
        }
    }

    #[test]
    fn label_constant_on_each_interval() {
        let m = IntervalParityModel::random_default(6, Seed(9)).unwrap();
        for &j in m.zeta() {
            let (lo, hi) = IntervalParityModel::support_interval(j);
            let first = m.true_label(lo + 1e-9).unwrap();
            for i in 1..1000 {
                let x = lo + (hi - lo) * i as f64 / 1000.0;
                assert_eq!(m.true_label(x).unwrap(), first);
            }
        }
    }

    #[test]
    fn parity_ball_label_examples() {
        // (2.6, 3.1) sits 0.41 from (3, 3), so it needs a wider ball.
        let wide = ParityBallModel::new(0.45, 4, 0).unwrap();
        assert_eq!(wide.label(&[2.6, 3.1]).unwrap(), 0);
        let m = ParityBallModel::new(0.3, 4, 0).unwrap();
        assert!(matches!(m.label(&[2.6, 3.1]), Err(LabError::NotOnSupport)));
        assert_eq!(m.label(&[3.0, 2.0]).unwrap(), 1);
        assert!(matches!(m.label(&[2.5, 2.5]), Err(LabError::NotOnSupport)));
        assert!(m.label(&[1.0]).is_err());
        let flipped = ParityBallModel::new(0.3, 4, 1).unwrap();
        assert_eq!(flipped.label(&[3.0, 2.0]).unwrap(), 0);
    }

    #[test]
    fn parity_ball_validation() {
        assert!(ParityBallModel::new(0.0, 3, 0).is_err());
        assert!(ParityBallModel::new(0.71, 3, 0).is_err());
        assert!(ParityBallModel::new(0.3, 0, 0).is_err());
        assert!(ParityBallModel::new(0.3, 3, 2).is_err());
    }

    #[test]
    fn parity_ball_samples_in_their_balls() {
        let m = ParityBallModel::new(0.34, 5, 0).unwrap();
        let (ds, comps) = m.sample_with_components(5000, Seed(4)).unwrap();
        let balls = m.balls();
        for (s, &c) in ds.samples().iter().zip(&comps) {
            let ball = balls[c];
            assert!((s.x[0] - ball.center[0]).hypot(s.x[1] - ball.center[1]) <= m.r() + 1e-12);
            assert_eq!(s.y, ball.label);
            assert_eq!(m.label(&s.x).unwrap(), s.y);
        }
    }

    #[test]
    fn explicit_separator_splits_small_balls() {
        let r = 1.0 / (2.0 * SQRT_2) - 1e-3;
        let m = ParityBallModel::new(r, 6, 0).unwrap();
        let ds = m.sample(3000, Seed(8)).unwrap();
        for s in ds.samples() {
            let z = 2.0 * s.y as f64 - 1.0;
            assert!(z * (s.x[0] - s.x[1] - 0.5) > 0.0);
        }
    }

    #[test]
    fn parity_ball_label_balance() {
        let m = ParityBallModel::new(0.3, 4, 0).unwrap();
        let ds = m.sample(10_000, Seed(6)).unwrap();
        let ones = ds.labels().iter().filter(|&&y| y == 1).count() as f64 / 1e4;
        assert!((0.48..=0.52).contains(&ones));
    }

    #[test]
    fn parity_ball_label_constant_per_ball() {
        let m = ParityBallModel::new(0.34, 3, 0).unwrap();
        let mut rng = Seed(12).rng();
        for ball in m.balls() {
            for _ in 0..1000 {
                let p = uniform_in_disk(&mut rng, ball.center, ball.radius);
                assert_eq!(m.label(&p).unwrap(), ball.label);
            }
        }
    }

    fn two_circles(weights: Option<Vec<f64>>) -> BlobWorld {
        BlobWorld::new(
            vec![
                Circle { center: [0.0, 0.0], radius: 1.0, label: 0 },
                Circle { center: [3.0, 0.0], radius: 1.0, label: 1 },
            ],
            weights,
        )
        .unwrap()
    }

    #[test]
    fn blob_samples_inside_one_circle() {
        let w = two_circles(None);
        let ds = w.sample(3000, Seed(3)).unwrap();
        for s in ds.samples() {
            let inside: Vec<_> = w.circles().iter().filter(|c| c.contains(&s.x)).collect();
            assert_eq!(inside.len(), 1);
            assert_eq!(inside[0].label, s.y);
        }
    }

    #[test]
    fn blob_weights_respected() {
        let w = two_circles(Some(vec![1.0, 0.0]));
        let (_, comps) = w.sample_with_components(500, Seed(3)).unwrap();
        assert!(comps.iter().all(|&c| c == 0));
        let eq = two_circles(Some(vec![1.0, 1.0]));
        let (_, comps) = eq.sample_with_components(10_000, Seed(3)).unwrap();
        let frac = comps.iter().filter(|&&c| c == 0).count() as f64 / 1e4;
        assert!((0.48..=0.52).contains(&frac));
    }

    #[test]
    fn blob_validation() {
        let overlapping = vec![
            Circle { center: [0.0, 0.0], radius: 1.0, label: 0 },
            Circle { center: [1.5, 0.0], radius: 1.0, label: 1 },
        ];
        assert!(BlobWorld::new(overlapping, None).is_err());
        let bad_radius = vec![Circle { center: [0.0, 0.0], radius: 0.0, label: 0 }];
        assert!(BlobWorld::new(bad_radius, None).is_err());
        let c = vec![Circle { center: [0.0, 0.0], radius: 1.0, label: 0 }];
        assert!(BlobWorld::new(c, Some(vec![0.0])).is_err());
    }

    #[test]
    fn zero_sigma_reproduces_prototypes() {
        let (p0, p1) = synthetic_prototypes(8).unwrap();
        let m = PrototypeNoiseModel::new(p0.clone(), p1.clone(), 0.0).unwrap();
        let ds = m.sample(200, 0.0, Seed(1)).unwrap();
        assert_eq!(ds.flipped_count(), 0);
        for s in ds.samples() {
            assert_eq!(&s.x, if s.y == 0 { &p0 } else { &p1 });
        }
    }

    #[test]
    fn gaussian_noise_radius_matches_chi_mean() {
        // E|N(0, I_64)| = sqrt(2) Gamma(32.5) / Gamma(32) ~ 7.98.
        let (p0, p1) = synthetic_prototypes(64).unwrap();
        let m = PrototypeNoiseModel::new(p0, p1, 1.0).unwrap();
        let ds = m.sample(4000, 0.0, Seed(2)).unwrap();
        for class in 0..2 {
            let proto = m.prototype(class);
            let dists: Vec<f64> = ds
                .samples()
                .iter()
                .filter(|s| s.y == class)
                .map(|s| s.x.iter().zip(proto.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                .collect();
            let mean = dists.iter().sum::<f64>() / dists.len() as f64;
            assert!((mean - 8.0).abs() < 0.4, "class {class}: {mean}");
        }
    }

    #[test]
    fn prototype_validation() {
        let (p0, _) = synthetic_prototypes(4).unwrap();
        assert!(PrototypeNoiseModel::new(p0.clone(), p0.clone(), 1.0).is_err());
        let (q0, q1) = synthetic_prototypes(4).unwrap();
        assert!(PrototypeNoiseModel::new(q0, q1, -1.0).is_err());
        assert!(synthetic_prototypes(1).is_err());
    }
}
