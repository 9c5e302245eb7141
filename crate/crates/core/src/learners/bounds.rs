//! Sample sizes from the concentration arguments. All logs are natural.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFormula {
    Majority,
    MinWeight,
    Infected,
    Representation,
}

impl fmt::Display for BoundFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundFormula::Majority => "majority",
            BoundFormula::MinWeight => "min-weight",
            BoundFormula::Infected => "infected",
            BoundFormula::Representation => "representation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBound {
    pub formula: BoundFormula,
    pub params: BTreeMap<String, f64>,
    /// The unrounded expression.
    pub raw: f64,
    pub value: u64,
}

impl SampleBound {
    fn new(formula: BoundFormula, params: &[(&str, f64)], raw: f64) -> Result<Self> {
        if !raw.is_finite() {
            return Err(invalid(format!("{formula} bound is not finite")));
        }
        Ok(Self {
            formula,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            raw,
            value: (raw.ceil() as u64).max(1),
        })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..0.5).contains(&eta) {
        return Err(invalid(format!("noise rate {eta} outside [0, 1/2)")));
    }
    Ok(())
}

fn check_delta(delta: f64, name: &str) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("{name} = {delta} outside (0, 1)")));
    }
    Ok(())
}

fn check_zeta(zeta_size: usize) -> Result<()> {
    if zeta_size == 0 {
        return Err(invalid("support must have at least one interval"));
    }
    Ok(())
}

fn vote_factor(eta: f64) -> f64 {
    8.0 * (1.0 - eta) / (1.0 - 2.0 * eta).powi(2)
}

/// Votes per integer so a majority is correct with probability `1 - delta1`.
pub fn bound_majority(eta: f64, delta1: f64) -> Result<SampleBound> {
    check_eta(eta)?;
    check_delta(delta1, "delta1")?;
    let raw = vote_factor(eta) * (1.0 / delta1).ln();
    SampleBound::new(BoundFormula::Majority, &[("eta", eta), ("delta1", delta1)], raw)
}

/// Samples so every support interval receives at least `k` points.
pub fn bound_minwt(zeta_size: usize, k: u64, delta2: f64) -> Result<SampleBound> {
    check_zeta(zeta_size)?;
    check_delta(delta2, "delta2")?;
    let z = zeta_size as f64;
    let raw = 2.0 * z * z * k as f64 + 2.0 * z * z * (z / delta2).ln();
    SampleBound::new(
        BoundFormula::MinWeight,
        &[("zeta_size", z), ("k", k as f64), ("delta2", delta2)],
        raw,
    )
}

/// Samples so every support interval holds a flipped label when each
/// carries mass at least `c2`.
pub fn bound_infected(zeta_size: usize, eta: f64, c2: f64, delta: f64) -> Result<SampleBound> {
    check_zeta(zeta_size)?;
    check_delta(delta, "delta")?;
    if !(eta > 0.0 && eta < 0.5) {
        return Err(invalid(format!("noise rate {eta} must lie in (0, 1/2)")));
    }
    if !(c2 > 0.0 && c2 <= 1.0) {
        return Err(invalid(format!("mass floor {c2} outside (0, 1]")));
    }
    let z = zeta_size as f64;
    let raw = z / (eta * c2) * (z / delta).ln();
    SampleBound::new(
        BoundFormula::Infected,
        &[("zeta_size", z), ("eta", eta), ("c2", c2), ("delta", delta)],
        raw,
    )
}

/// The representation separation sample size with the default support
/// size `2n`.
pub fn bound_thm3(n: u32, eta: f64, gamma: f64, delta: f64) -> Result<SampleBound> {
    if n == 0 {
        return Err(invalid("bit width must be positive"));
    }
    bound_thm3_support(2 * n as usize, eta, gamma, delta)
}

/// `max(2 z^2 ln(2z/delta) (8(1-eta)/(1-2eta)^2 + 1), 0.1 z/(eta gamma^2) ln(0.1 z/(gamma delta)))`.
pub fn bound_thm3_support(zeta_size: usize, eta: f64, gamma: f64, delta: f64) -> Result<SampleBound> {
    check_zeta(zeta_size)?;
    check_delta(delta, "delta")?;
    if !(eta > 0.0 && eta < 0.5) {
        return Err(invalid(format!("noise rate {eta} must lie in (0, 1/2)")));
    }
    if !(gamma > 0.0) {
        return Err(invalid(format!("radius {gamma} must be positive")));
    }
    let (vote, fit) = thm3_branches(zeta_size as f64, eta, gamma, delta);
    SampleBound::new(
        BoundFormula::Representation,
        &[("zeta_size", zeta_size as f64), ("eta", eta), ("gamma", gamma), ("delta", delta)],
        vote.max(fit),
    )
}

fn thm3_branches(z: f64, eta: f64, gamma: f64, delta: f64) -> (f64, f64) {
    let vote = 2.0 * z * z * (2.0 * z / delta).ln() * (vote_factor(eta) + 1.0);
    // The log can go negative for tiny supports; the branch then contributes nothing.
    let fit = (0.1 * z / (eta * gamma * gamma) * (0.1 * z / (gamma * delta)).ln()).max(0.0);
    (vote, fit)
}
