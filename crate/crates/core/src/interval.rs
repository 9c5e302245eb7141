//! Finite unions of real intervals with per-endpoint open/closed flags.
//!
//! A normalized [`IntervalSet`] keeps its pieces sorted and pairwise
//! separated: two pieces are merged whenever their union is connected, so
//! `(0,1) ∪ (1,2)` stays split (the point 1 is missing) while
//! `(0,1] ∪ (1,2)` collapses to `(0,2)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self { lo, hi, lo_closed, hi_closed }
    }

    /// Infinite endpoints are always open.
    fn canonical(mut self) -> Self {
        if self.lo == f64::NEG_INFINITY {
            self.lo_closed = false;
        }
        if self.hi == f64::INFINITY {
            self.hi_closed = false;
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = x > self.lo || (self.lo_closed && x == self.lo);
        let below = x < self.hi || (self.hi_closed && x == self.hi);
        above && below
    }

    pub fn length(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.partial_cmp(&other.lo) {
            Some(Ordering::Greater) => (self.lo, self.lo_closed),
            Some(Ordering::Less) => (other.lo, other.lo_closed),
            _ => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Less) => (self.hi, self.hi_closed),
            Some(Ordering::Greater) => (other.hi, other.hi_closed),
            _ => (self.hi, self.hi_closed && other.hi_closed),
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }
}

/// A normalized finite union of intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct IntervalSet {
    pieces: Vec<Interval>,
}

impl From<Vec<Interval>> for IntervalSet {
    fn from(v: Vec<Interval>) -> Self {
        IntervalSet::from_intervals(v)
    }
}

impl From<IntervalSet> for Vec<Interval> {
    fn from(s: IntervalSet) -> Self {
        s.pieces
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn real_line() -> Self {
        Self { pieces: vec![Interval::open(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    pub fn from_interval(iv: Interval) -> Self {
        Self::from_intervals(vec![iv])
    }

    pub fn from_intervals<I: IntoIterator<Item = Interval>>(ivs: I) -> Self {
        let mut pieces: Vec<Interval> = ivs
            .into_iter()
            .map(Interval::canonical)
            .filter(|iv| !iv.is_empty())
            .collect();
        // Closed left endpoints sort first so the merge sees the larger piece.
        pieces.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo)
                .unwrap_or(Ordering::Equal)
                .then(b.lo_closed.cmp(&a.lo_closed))
        });
        let mut out: Vec<Interval> = Vec::with_capacity(pieces.len());
        for iv in pieces {
            if let Some(last) = out.last_mut() {
                let connected = iv.lo < last.hi
                    || (iv.lo == last.hi && (last.hi_closed || iv.lo_closed));
                if connected {
                    match iv.hi.partial_cmp(&last.hi) {
                        Some(Ordering::Greater) => {
                            last.hi = iv.hi;
                            last.hi_closed = iv.hi_closed;
                        }
                        Some(Ordering::Equal) => last.hi_closed |= iv.hi_closed,
                        _ => {}
                    }
                    if iv.lo == last.lo {
                        last.lo_closed |= iv.lo_closed;
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        Self { pieces: out }
    }

    /// Validated construction from raw `(lo, hi)` closed intervals.
    pub fn from_closed_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        for &(lo, hi) in pairs {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(invalid(format!("bad interval [{lo}, {hi}]")));
            }
        }
        Ok(Self::from_intervals(pairs.iter().map(|&(a, b)| Interval::closed(a, b))))
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        // First piece whose upper end is not below x.
        let idx = self.pieces.partition_point(|iv| iv.hi < x);
        self.pieces[idx..]
            .iter()
            .take(2)
            .any(|iv| iv.contains(x))
    }

    /// Lebesgue measure; isolated points contribute nothing.
    pub fn measure(&self) -> f64 {
        self.pieces.iter().map(Interval::length).sum()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        Self::from_intervals(self.pieces.iter().chain(&other.pieces).copied())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let a = &self.pieces[i];
            let b = &other.pieces[j];
            let c = a.intersect(b);
            if !c.is_empty() {
                out.push(c);
            }
            // Advance whichever piece ends first (the open end on ties).
            let a_first = a.hi < b.hi || (a.hi == b.hi && !a.hi_closed);
            if a_first {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    pub fn intersect_interval(&self, iv: Interval) -> IntervalSet {
        self.intersect(&IntervalSet::from_interval(iv))
    }

    /// Complement in the real line.
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.pieces.len() + 1);
        let mut lo = f64::NEG_INFINITY;
        let mut lo_closed = false;
        for iv in &self.pieces {
            out.push(Interval::new(lo, iv.lo, lo_closed, !iv.lo_closed));
            lo = iv.hi;
            lo_closed = !iv.hi_closed;
        }
        out.push(Interval::new(lo, f64::INFINITY, lo_closed, false));
        Self::from_intervals(out)
    }

    /// Minkowski sum with the closed ball `[-r, r]`: every point within
    /// distance `r` of the set.
    pub fn dilate(&self, r: f64) -> IntervalSet {
        if r <= 0.0 {
            return self.clone();
        }
        Self::from_intervals(self.pieces.iter().map(|iv| {
            Interval::new(iv.lo - r, iv.hi + r, iv.lo_closed, iv.hi_closed)
        }))
    }

    /// Endpoints of every piece, i.e. points where membership can change.
    pub fn boundary_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|iv| [iv.lo, iv.hi])
            .filter(|x| x.is_finite())
            .collect();
        pts.dedup();
        pts
    }
}
