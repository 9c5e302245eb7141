use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hypotheses::{Classifier, LinearClassifier, ParityHypothesis, UnionOfIntervals};
use crate::data::TrainView;
use crate::error::{invalid, LabError, Result};
use crate::gf2::{gf2_solve, BitRow, Gf2Outcome, Gf2System};
use crate::interval::{Interval, IntervalSet};

/// Modal binary label; on equal counts returns `(0, true)`.
pub fn majority_vote(labels: &[usize]) -> Result<(usize, bool)> {
    if labels.is_empty() {
        return Err(invalid("majority vote over an empty list"));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(invalid(format!("majority vote expects binary labels, got {bad}")));
    }
    let ones = labels.iter().filter(|&&y| y == 1).count();
    let zeros = labels.len() - ones;
    Ok(match ones.cmp(&zeros) {
        std::cmp::Ordering::Greater => (1, false),
        std::cmp::Ordering::Less => (0, false),
        std::cmp::Ordering::Equal => (0, true),
    })
}

fn group_by_nearest_integer(view: TrainView<'_>) -> Result<BTreeMap<i64, Vec<usize>>> {
    if view.dim() != 1 {
        return Err(LabError::DimensionMismatch { expected: 1, got: view.dim() });
    }
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for i in 0..view.len() {
        groups.entry(crate::data::round_nearest(view.x(i)[0])?).or_default().push(i);
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityFit {
    pub hypothesis: ParityHypothesis,
    /// The de-noised `(integer, label)` rows handed to the solver.
    pub votes: Vec<(i64, usize)>,
    /// Integers whose vote was a tie.
    pub ties: Vec<i64>,
    /// Parity indices the votes leave unconstrained (zero-filled).
    pub free_vars: Vec<usize>,
}

/// Round every point, majority-vote per integer, then solve the parity
/// system over GF(2) with the voted rows.
pub fn learn_parity(view: TrainView<'_>, n: u32) -> Result<ParityFit> {
    if view.is_empty() {
        return Err(invalid("cannot learn from an empty dataset"));
    }
    if !(1..=62).contains(&n) {
        return Err(invalid(format!("bit width {n} outside 1..=62")));
    }
    let top = 1i64 << n;
    let groups = group_by_nearest_integer(view)?;
    let mut votes = Vec::with_capacity(groups.len());
    let mut ties = Vec::new();
    let mut sys = Gf2System::new(n as usize)?;
    for (&k, members) in &groups {
        if !(0..=top).contains(&k) {
            return Err(LabError::OutOfRange(format!("point rounds to {k}, outside [0, {top}]")));
        }
        let labels: Vec<usize> = members.iter().map(|&i| view.y(i)).collect();
        let (label, tie) = majority_vote(&labels)?;
        if tie {
            ties.push(k);
        }
        votes.push((k, label));
        // Low n bits; 2^n itself reads as all zeros.
        let bits = (k as u64) & ((1u64 << n) - 1);
        let row = BitRow::from_bools(&(0..n).map(|b| (bits >> b) & 1 == 1).collect::<Vec<_>>());
        sys.push(row, label == 1)?;
    }
    let sol = match gf2_solve(&sys) {
        Gf2Outcome::Solved(sol) => sol,
        Gf2Outcome::Inconsistent => {
            return Err(LabError::DataCorruption(
                "voted labels are not consistent with any parity".into(),
            ))
        }
    };
    let set = sol.x.ones().into_iter().map(|b| b as u32).collect();
    let hypothesis = ParityHypothesis::line(n, set)?;
    if let Some(&(k, _)) = votes.iter().find(|&&(k, y)| hypothesis.label_of_integer(k) != y) {
        return Err(LabError::DataCorruption(format!("solution disagrees with the vote at {k}")));
    }
    Ok(ParityFit { hypothesis, votes, ties, free_vars: sol.free_vars })
}

/// Majority-voted unit intervals around each occupied integer, then patched
/// so every training point is fit: single points for dissenting `1`s, cuts
/// for dissenting `0`s. The result has zero training error.
pub fn learn_union_intervals(view: TrainView<'_>) -> Result<UnionOfIntervals> {
    if view.is_empty() {
        return Err(invalid("cannot learn from an empty dataset"));
    }
    let groups = group_by_nearest_integer(view)?;
    let mut voted = Vec::new();
    let mut add_points = Vec::new();
    let mut cut_points = Vec::new();
    for (&z, members) in &groups {
        let labels: Vec<usize> = members.iter().map(|&i| view.y(i)).collect();
        let (vote, _) = majority_vote(&labels)?;
        if vote == 1 {
            voted.push(Interval::open(z as f64 - 0.5, z as f64 + 0.5));
        }
        for &i in members {
            if view.y(i) != vote {
                let x = view.x(i)[0];
                if view.y(i) == 1 {
                    add_points.push(Interval::point(x));
                } else {
                    cut_points.push(Interval::point(x));
                }
            }
        }
    }
    let base = IntervalSet::from_intervals(voted);
    let patched = base
        .union(&IntervalSet::from_intervals(add_points))
        .intersect(&IntervalSet::from_intervals(cut_points).complement());
    let h = UnionOfIntervals::new(patched);
    if let Some(i) = (0..view.len()).find(|&i| h.label_of(view.x(i)) != view.y(i)) {
        return Err(LabError::DataCorruption(format!(
            "point {} carries both labels; zero training error is impossible",
            view.x(i)[0]
        )));
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PerceptronOutcome {
    Separated { classifier: LinearClassifier, epochs: usize },
    NotSeparated { epochs: usize },
}

impl PerceptronOutcome {
    pub fn classifier(&self) -> Option<&LinearClassifier> {
        match self {
            PerceptronOutcome::Separated { classifier, .. } => Some(classifier),
            PerceptronOutcome::NotSeparated { .. } => None,
        }
    }
}

pub const DEFAULT_PERCEPTRON_EPOCHS: usize = 10_000;

/// Mistake-driven perceptron with an augmented bias. Returns after the first
/// pass with no mistakes.
pub fn fit_perceptron(view: TrainView<'_>, max_epochs: usize) -> Result<PerceptronOutcome> {
    if view.is_empty() {
        return Err(invalid("cannot fit an empty dataset"));
    }
    if view.num_classes() != 2 {
        return Err(invalid("perceptron needs binary labels"));
    }
    let d = view.dim();
    let mut w = vec![0.0; d];
    let mut w0 = 0.0;
    for epoch in 1..=max_epochs {
        let mut mistakes = 0usize;
        for (x, y) in view.iter() {
            let z = if y == 1 { 1.0 } else { -1.0 };
            let s: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w0;
            if z * s <= 0.0 {
                for (wi, xi) in w.iter_mut().zip(x) {
                    *wi += z * xi;
                }
                w0 += z;
                mistakes += 1;
            }
        }
        if mistakes == 0 {
            let classifier = LinearClassifier::new(w, w0).map_err(|_| {
                invalid("separating weights are zero; the data carries no direction")
            })?;
            return Ok(PerceptronOutcome::Separated { classifier, epochs: epoch });
        }
    }
    Ok(PerceptronOutcome::NotSeparated { epochs: max_epochs })
}
