use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TrainView};
use crate::distributions::parity_of_integer;
use crate::error::{invalid, LabError, Result};
use crate::interval::{Interval, IntervalSet};

/// Anything that maps a point to a class label.
pub trait Classifier: Sync {
    fn input_dim(&self) -> usize;

    /// Label of `x`; `x.len()` must equal [`Classifier::input_dim`].
    fn label_of(&self, x: &[f64]) -> usize;

    fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.input_dim() {
            return Err(LabError::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        Ok(self.label_of(x))
    }

    /// Labels of row-major inputs; networks override this with a batched pass.
    fn label_batch(&self, xs: &[f64]) -> Vec<usize> {
        xs.chunks_exact(self.input_dim()).map(|x| self.label_of(x)).collect()
    }
}

impl<T: Classifier + ?Sized> Classifier for &T {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn label_of(&self, x: &[f64]) -> usize {
        (**self).label_of(x)
    }

    fn label_batch(&self, xs: &[f64]) -> Vec<usize> {
        (**self).label_batch(xs)
    }
}

/// One-dimensional classifiers whose positive region can be written down
/// exactly as a union of intervals.
pub trait LineClassifier {
    /// `{x in [lo, hi] : h(x) = 1}`.
    fn positive_region(&self, lo: f64, hi: f64) -> IntervalSet;
}

fn window(lo: f64, hi: f64) -> Interval {
    Interval::closed(lo, hi)
}

/// `1` iff `w . x + w0 > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub w: Vec<f64>,
    pub w0: f64,
}

impl LinearClassifier {
    pub fn new(w: Vec<f64>, w0: f64) -> Result<Self> {
        if w.is_empty() || w.iter().chain([&w0]).any(|v| !v.is_finite()) {
            return Err(invalid("linear classifier needs finite, non-empty weights"));
        }
        if w.iter().all(|&v| v == 0.0) {
            return Err(invalid("weight vector must be non-zero"));
        }
        Ok(Self { w, w0 })
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.w0
    }

    pub fn norm(&self) -> f64 {
        self.w.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Classifier for LinearClassifier {
    fn input_dim(&self) -> usize {
        self.w.len()
    }

    fn label_of(&self, x: &[f64]) -> usize {
        usize::from(self.score(x) > 0.0)
    }
}

impl LineClassifier for LinearClassifier {
    fn positive_region(&self, lo: f64, hi: f64) -> IntervalSet {
        let (w, w0) = (self.w[0], self.w0);
        let t = -w0 / w;
        let half = if w > 0.0 {
            Interval::open(t, f64::INFINITY)
        } else {
            Interval::open(f64::NEG_INFINITY, t)
        };
        IntervalSet::from_interval(half).intersect_interval(window(lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityMode {
    /// Parity of the bits in `set` of the nearest integer to a scalar.
    Line,
    /// Planar rule: `1` iff `[x1] + [x2] = b (mod 2)`.
    Plane { b: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityHypothesis {
    pub n: u32,
    pub set: Vec<u32>,
    pub mode: ParityMode,
}

impl ParityHypothesis {
    pub fn line(n: u32, mut set: Vec<u32>) -> Result<Self> {
        if !(1..=62).contains(&n) {
            return Err(invalid(format!("bit width {n} outside 1..=62")));
        }
        set.sort_unstable();
        set.dedup();
        if set.iter().any(|&b| b >= n) {
            return Err(invalid("parity index out of range"));
        }
        Ok(Self { n, set, mode: ParityMode::Line })
    }

    pub fn plane(b: u8) -> Result<Self> {
        if b > 1 {
            return Err(invalid("orientation bit must be 0 or 1"));
        }
        Ok(Self { n: 1, set: Vec::new(), mode: ParityMode::Plane { b } })
    }

    pub fn label_of_integer(&self, k: i64) -> usize {
        parity_of_integer(k, &self.set, self.n)
    }
}

impl Classifier for ParityHypothesis {
    fn input_dim(&self) -> usize {
        match self.mode {
            ParityMode::Line => 1,
            ParityMode::Plane { .. } => 2,
        }
    }

    fn label_of(&self, x: &[f64]) -> usize {
        match self.mode {
            ParityMode::Line => self.label_of_integer(x[0].round() as i64),
            ParityMode::Plane { b } => {
                let s = x[0].round() as i64 + x[1].round() as i64;
                usize::from(s.rem_euclid(2) == b as i64)
            }
        }
    }
}

impl LineClassifier for ParityHypothesis {
    fn positive_region(&self, lo: f64, hi: f64) -> IntervalSet {
        let first = lo.round() as i64;
        let last = hi.round() as i64;
        // Halves round away from zero, so the piece of k > 0 is
        // [k - 1/2, k + 1/2), of k < 0 is (k - 1/2, k + 1/2], of 0 is open.
        let pieces = (first..=last).filter(|&k| self.label_of_integer(k) == 1).map(|k| {
            let c = k as f64;
            match k.signum() {
                1 => Interval::new(c - 0.5, c + 0.5, true, false),
                -1 => Interval::new(c - 0.5, c + 0.5, false, true),
                _ => Interval::open(-0.5, 0.5),
            }
        });
        IntervalSet::from_intervals(pieces).intersect_interval(window(lo, hi))
    }
}

/// `1` inside any of the intervals, `0` elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionOfIntervals {
    pub intervals: IntervalSet,
}

impl UnionOfIntervals {
    pub fn new(intervals: IntervalSet) -> Self {
        Self { intervals }
    }

    /// Closed intervals `[lo, hi]`; `lo == hi` gives a single point.
    pub fn from_closed(pairs: &[(f64, f64)]) -> Result<Self> {
        Ok(Self::new(IntervalSet::from_closed_pairs(pairs)?))
    }
}

impl Classifier for UnionOfIntervals {
    fn input_dim(&self) -> usize {
        1
    }

    fn label_of(&self, x: &[f64]) -> usize {
        usize::from(self.intervals.contains(x[0]))
    }
}

impl LineClassifier for UnionOfIntervals {
    fn positive_region(&self, lo: f64, hi: f64) -> IntervalSet {
        self.intervals.intersect_interval(window(lo, hi))
    }
}

/// 1-nearest-neighbour under the Euclidean metric; ties go to the lowest
/// stored index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestNeighborModel {
    dim: usize,
    num_classes: usize,
    points: Vec<f64>,
    labels: Vec<usize>,
    /// For one-dimensional data: `(x, label, index)` sorted by `x`, keeping
    /// the lowest-index sample among duplicates.
    #[serde(skip)]
    sorted_1d: Vec<(f64, usize, usize)>,
}

impl NearestNeighborModel {
    pub fn fit(view: TrainView<'_>) -> Result<Self> {
        if view.is_empty() {
            return Err(invalid("nearest-neighbour model needs at least one sample"));
        }
        let dim = view.dim();
        let mut points = Vec::with_capacity(view.len() * dim);
        let mut labels = Vec::with_capacity(view.len());
        for (x, y) in view.iter() {
            points.extend_from_slice(x);
            labels.push(y);
        }
        let mut model = Self { dim, num_classes: view.num_classes(), points, labels, sorted_1d: Vec::new() };
        model.build_index();
        Ok(model)
    }

    fn build_index(&mut self) {
        if self.dim != 1 {
            return;
        }
        let mut idx: Vec<usize> = (0..self.labels.len()).collect();
        idx.sort_by(|&a, &b| self.points[a].total_cmp(&self.points[b]).then(a.cmp(&b)));
        let mut sorted: Vec<(f64, usize, usize)> = Vec::with_capacity(idx.len());
        for i in idx {
            let x = self.points[i];
            if sorted.last().is_none_or(|&(px, _, _)| px != x) {
                sorted.push((x, self.labels[i], i));
            }
        }
        self.sorted_1d = sorted;
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn stored(&self) -> Result<Dataset> {
        let pts = self
            .points
            .chunks(self.dim)
            .map(|c| crate::data::Point::new(c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Dataset::from_points(pts, self.labels.clone(), self.num_classes)
    }

    fn nearest_1d(&self, x: f64) -> usize {
        let s = &self.sorted_1d;
        let pos = s.partition_point(|&(p, _, _)| p < x);
        let right = s.get(pos);
        let left = pos.checked_sub(1).map(|i| &s[i]);
        match (left, right) {
            (Some(l), Some(r)) => {
                let (dl, dr) = (x - l.0, r.0 - x);
                if dl < dr {
                    l.1
                } else if dr < dl {
                    r.1
                } else if l.2 < r.2 {
                    l.1
                } else {
                    r.1
                }
            }
            (Some(l), None) => l.1,
            (None, Some(r)) => r.1,
            (None, None) => unreachable!("model is non-empty"),
        }
    }
}

impl Classifier for NearestNeighborModel {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn label_of(&self, x: &[f64]) -> usize {
        if self.dim == 1 && !self.sorted_1d.is_empty() {
            return self.nearest_1d(x[0]);
        }
        let mut best = (f64::INFINITY, 0usize);
        for (i, p) in self.points.chunks_exact(self.dim).enumerate() {
            let d: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, i);
            }
        }
        self.labels[best.1]
    }
}

impl LineClassifier for NearestNeighborModel {
    fn positive_region(&self, lo: f64, hi: f64) -> IntervalSet {
        let s = &self.sorted_1d;
        let mid = |i: usize| s.get(i + 1).map_or(f64::INFINITY, |&(q, _, _)| 0.5 * (s[i].0 + q));
        // Only cells meeting [lo, hi] matter: from the first whose right end
        // reaches lo to the first whose left end passes hi.
        let first = s.partition_point(|&(p, _, _)| p < lo).saturating_sub(1);
        let last = (s.partition_point(|&(p, _, _)| p <= hi) + 1).min(s.len());
        let mut pieces = Vec::new();
        let mut start = if first == 0 { f64::NEG_INFINITY } else { mid(first - 1) };
        for (i, &(_, label, _)) in s.iter().enumerate().take(last).skip(first) {
            let end = mid(i);
            if label == 1 {
                pieces.push(Interval::open(start, end));
            }
            if end.is_finite() && self.nearest_1d(end) == 1 {
                pieces.push(Interval::point(end));
            }
            start = end;
        }
        IntervalSet::from_intervals(pieces).intersect_interval(window(lo, hi))
    }
}

/// Every classical hypothesis, for serialization and evaluator dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Hypothesis {
    Linear(LinearClassifier),
    Parity(ParityHypothesis),
    Intervals(UnionOfIntervals),
    NearestNeighbor(NearestNeighborModel),
}

impl Hypothesis {
    pub fn name(&self) -> &'static str {
        match self {
            Hypothesis::Linear(_) => "linear",
            Hypothesis::Parity(_) => "parity",
            Hypothesis::Intervals(_) => "union-of-intervals",
            Hypothesis::NearestNeighbor(_) => "1-nn",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut h: Hypothesis = serde_json::from_str(s)?;
        if let Hypothesis::NearestNeighbor(m) = &mut h {
            m.build_index();
        }
        Ok(h)
    }

    /// Exact 1D view, if this hypothesis has one.
    pub fn as_line(&self) -> Option<&dyn LineClassifier> {
        match self {
            Hypothesis::Linear(h) if h.w.len() == 1 => Some(h),
            Hypothesis::Parity(h) if h.mode == ParityMode::Line => Some(h),
            Hypothesis::Intervals(h) => Some(h),
            Hypothesis::NearestNeighbor(h) if h.dim == 1 => Some(h),
            _ => None,
        }
    }
}

impl Classifier for Hypothesis {
    fn input_dim(&self) -> usize {
        match self {
            Hypothesis::Linear(h) => h.input_dim(),
            Hypothesis::Parity(h) => h.input_dim(),
            Hypothesis::Intervals(h) => h.input_dim(),
            Hypothesis::NearestNeighbor(h) => h.input_dim(),
        }
    }

    fn label_of(&self, x: &[f64]) -> usize {
        match self {
            Hypothesis::Linear(h) => h.label_of(x),
            Hypothesis::Parity(h) => h.label_of(x),
            Hypothesis::Intervals(h) => h.label_of(x),
            Hypothesis::NearestNeighbor(h) => h.label_of(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, Point};
    use proptest::prelude::*;

    #[test]
    fn linear_prediction_example() {
        let h = LinearClassifier::new(vec![1.0, -1.0], -0.5).unwrap();
        // 3.1 - 3.0 - 0.5 = -0.4
        assert_eq!(h.predict(&[3.1, 3.0]).unwrap(), 0);
        assert!(h.predict(&[1.0]).is_err());
        assert!(LinearClassifier::new(vec![0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn interval_prediction_example() {
        let h = UnionOfIntervals::from_closed(&[(1.0, 2.0)]).unwrap();
        assert_eq!(h.predict(&[1.5]).unwrap(), 1);
        assert_eq!(h.predict(&[2.5]).unwrap(), 0);
        assert_eq!(h.predict(&[2.0]).unwrap(), 1);
    }

    #[test]
    fn planar_parity_example() {
        let h = ParityHypothesis::plane(1).unwrap();
        assert_eq!(h.predict(&[2.6, 3.1]).unwrap(), 0);
        assert_eq!(h.predict(&[3.0, 2.0]).unwrap(), 1);
        let h0 = ParityHypothesis::plane(0).unwrap();
        assert_eq!(h0.predict(&[2.6, 3.1]).unwrap(), 1);
    }

    #[test]
    fn nearest_neighbour_ties_go_to_lowest_index() {
        let pts = vec![Point::new(vec![2.0]).unwrap(), Point::new(vec![0.0]).unwrap()];
        let ds = Dataset::from_points(pts, vec![1, 0], 2).unwrap();
        let nn = NearestNeighborModel::fit(ds.view()).unwrap();
        assert_eq!(nn.predict(&[1.0]).unwrap(), 1);
        assert_eq!(nn.predict(&[0.9]).unwrap(), 0);
        let pts2 = vec![Point::new(vec![0.0, 0.0]).unwrap(), Point::new(vec![2.0, 0.0]).unwrap()];
        let ds2 = Dataset::from_points(pts2, vec![1, 0], 2).unwrap();
        let nn2 = NearestNeighborModel::fit(ds2.view()).unwrap();
        assert_eq!(nn2.predict(&[1.0, 5.0]).unwrap(), 1);
    }

    #[test]
    fn json_round_trip() {
        let hs = vec![
            Hypothesis::Linear(LinearClassifier::new(vec![1.0, -1.0], -0.5).unwrap()),
            Hypothesis::Parity(ParityHypothesis::line(4, vec![0, 3]).unwrap()),
            Hypothesis::Intervals(UnionOfIntervals::from_closed(&[(0.5, 1.5), (3.0, 3.0)]).unwrap()),
        ];
        for h in hs {
            let back = Hypothesis::from_json(&h.to_json().unwrap()).unwrap();
            assert_eq!(back, h);
        }
        let json = Hypothesis::Parity(ParityHypothesis::line(4, vec![0, 3]).unwrap()).to_json().unwrap();
        assert!(json.contains("\"set\":[0,3]"), "{json}");
    }

    fn arbitrary_line_classifiers() -> impl Strategy<Value = Hypothesis> {
        prop_oneof![
            (-3.0f64..3.0, -3.0f64..3.0)
                .prop_filter("non-zero", |(w, _)| w.abs() > 1e-3)
                .prop_map(|(w, b)| Hypothesis::Linear(LinearClassifier::new(vec![w], b).unwrap())),
            (1u32..5, any::<u8>()).prop_map(|(n, bits)| {
                let set = (0..n).filter(|i| (bits >> i) & 1 == 1).collect();
                Hypothesis::Parity(ParityHypothesis::line(n, set).unwrap())
            }),
            proptest::collection::vec((-4.0f64..4.0, 0.0f64..1.0), 0..5).prop_map(|v| {
                let pairs: Vec<_> = v.into_iter().map(|(a, w)| (a, a + w)).collect();
                Hypothesis::Intervals(UnionOfIntervals::from_closed(&pairs).unwrap())
            }),
            proptest::collection::vec((-4.0f64..4.0, 0usize..2), 1..8).prop_map(|v| {
                let pts = v.iter().map(|(x, _)| Point::new(vec![*x]).unwrap()).collect();
                let ds = Dataset::from_points(pts, v.iter().map(|p| p.1).collect(), 2).unwrap();
                Hypothesis::NearestNeighbor(NearestNeighborModel::fit(ds.view()).unwrap())
            }),
        ]
    }

    proptest! {
        #[test]
        fn positive_region_matches_pointwise_prediction(
            h in arbitrary_line_classifiers(),
            k in -400i32..400,
            below in 0.0f64..2.0,
            above in 0.0f64..2.0,
        ) {
            let x = k as f64 * 0.0125 + 0.003;
            // Narrow windows exercise the restricted walk as well as the full one.
            for (lo, hi) in [(-6.0, 6.0), (x - below, x + above)] {
                let region = h.as_line().unwrap().positive_region(lo, hi);
                prop_assert_eq!(usize::from(region.contains(x)), h.label_of(&[x]));
            }
        }

        #[test]
        fn nearest_neighbour_ties_survive_windowing(pts in proptest::collection::vec((-4i32..4, 0usize..2), 2..8), w in 0.0f64..1.5) {
            let ps: Vec<_> = pts.iter().map(|&(x, _)| Point::new(vec![x as f64]).unwrap()).collect();
            let ds = Dataset::from_points(ps, pts.iter().map(|p| p.1).collect(), 2).unwrap();
            let h = NearestNeighborModel::fit(ds.view()).unwrap();
            // Integer samples put every Voronoi boundary on a multiple of 1/2.
            for t in -9..=9 {
                let x = t as f64 * 0.5;
                let region = h.positive_region(x - w, x + w);
                prop_assert_eq!(usize::from(region.contains(x)), h.label_of(&[x]));
            }
        }
    }
}
