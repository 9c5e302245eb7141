//! Monte-Carlo checks of the two concentration lemmas behind the sample
//! sizes: majority votes over noisy labels, and per-interval occupancy.

use noisylab::learners::{bound_majority, bound_minwt};
use noisylab::Seed;
use rand::Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

use super::{derive, ordered};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{opt, CsvRow};

const CHUNK: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Majority,
    MinWeight,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Majority => "majority",
            Check::MinWeight => "min-weight",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRow {
    pub check: Check,
    /// Noise rate of the majority check.
    pub eta: Option<f64>,
    pub m: usize,
    pub bound: u64,
    pub runs: usize,
    pub failures: usize,
    pub rate: f64,
    pub delta: f64,
    /// `P[X >= failures]` for `X ~ Bin(runs, delta)`: small values reject
    /// "failure probability is at most delta".
    pub p_value: f64,
}

impl CsvRow for McRow {
    const HEADER: &'static str = "check,eta,m,bound,runs,failures,rate,delta,p_value";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.check.name(),
            opt(self.eta),
            self.m,
            self.bound,
            self.runs,
            self.failures,
            self.rate,
            self.delta,
            self.p_value
        )
    }
}

/// One-sided upper-tail binomial p-value.
pub fn upper_tail(failures: usize, runs: usize, p: f64) -> Result<f64> {
    if failures == 0 {
        return Ok(1.0);
    }
    let b = Binomial::new(p, runs as u64).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    Ok((1.0 - b.cdf(failures as u64 - 1)).clamp(0.0, 1.0))
}

/// A vote of `m` labels, each flipped with probability `eta`, fails when
/// the flips are not a strict minority (ties count as failures).
fn majority_fails<R: Rng>(rng: &mut R, m: usize, eta: f64) -> bool {
    let flips = (0..m).filter(|_| rng.random::<f64>() < eta).count();
    2 * flips >= m
}

/// `m` uniform draws over `z` equal-mass intervals fail when some interval
/// receives fewer than `k`.
fn occupancy_fails<R: Rng>(rng: &mut R, m: usize, z: usize, k: u64, counts: &mut [u64]) -> bool {
    counts.iter_mut().for_each(|c| *c = 0);
    for _ in 0..m {
        counts[rng.random_range(0..z)] += 1;
    }
    counts.iter().any(|&c| c < k)
}

fn simulate(seed: Seed, runs: usize, trial: impl Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync) -> Result<usize> {
    let chunks: Vec<usize> = (0..runs.div_ceil(CHUNK)).collect();
    let counts = ordered(&chunks, |&c| {
        let mut rng = derive(seed, c as u64).rng();
        let len = CHUNK.min(runs - c * CHUNK);
        Ok((0..len).filter(|_| trial(&mut rng)).count())
    })?;
    Ok(counts.into_iter().sum())
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<McRow>> {
    let s = &cfg.sweep;
    let z = cfg.distribution.interval_zeta_size()?;
    let base = Seed(cfg.seed);
    let mut rows = Vec::new();
    let scaled = |bound: u64, scale: f64| ((bound as f64 * scale).ceil() as usize).max(1);
    for (ei, &eta) in s.eta.iter().enumerate() {
        let bound = bound_majority(eta, s.delta)?.value;
        for (si, &scale) in s.m_scale.iter().enumerate() {
            let m = scaled(bound, scale);
            let seed = derive(derive(base, 1 + ei as u64), si as u64);
            let failures = simulate(seed, s.runs, |rng| majority_fails(rng, m, eta))?;
            rows.push(row(Check::Majority, Some(eta), m, bound, s.runs, failures, s.delta)?);
        }
    }
    let bound = bound_minwt(z, s.min_count, s.delta)?.value;
    for (si, &scale) in s.m_scale.iter().enumerate() {
        let m = scaled(bound, scale);
        let seed = derive(derive(base, 0), si as u64);
        let failures = simulate(seed, s.runs, |rng| occupancy_fails(rng, m, z, s.min_count, &mut vec![0; z]))?;
        rows.push(row(Check::MinWeight, None, m, bound, s.runs, failures, s.delta)?);
    }
    Ok(rows)
}

fn row(check: Check, eta: Option<f64>, m: usize, bound: u64, runs: usize, failures: usize, delta: f64) -> Result<McRow> {
    Ok(McRow {
        check,
        eta,
        m,
        bound,
        runs,
        failures,
        rate: failures as f64 / runs as f64,
        delta,
        p_value: upper_tail(failures, runs, delta)?,
    })
}
