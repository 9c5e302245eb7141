//! The 1-NN interpolator on noisy interval data: once every support
//! interval holds a flipped label, its whole neighbourhood is vulnerable.

use std::collections::BTreeSet;

use noisylab::data::inject_label_noise;
use noisylab::distributions::INTERVAL_HALF_WIDTH;
use noisylab::learners::{bound_infected, Hypothesis, NearestNeighborModel};
use noisylab::risk::interval_risks;

use super::{derive, ordered, trial_seed};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::CsvRow;

#[derive(Debug, Clone, PartialEq)]
pub struct InfectedRow {
    pub trial: usize,
    pub eta: f64,
    pub m: usize,
    /// Support intervals holding at least one flipped training label.
    pub infected: usize,
    pub intervals: usize,
    pub gamma: f64,
    pub natural: f64,
    pub adversarial: f64,
    /// `adversarial >= c1`.
    pub success: bool,
}

impl CsvRow for InfectedRow {
    const HEADER: &'static str = "trial,eta,m,infected,intervals,gamma,natural,adversarial,success";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.eta,
            self.m,
            self.infected,
            self.intervals,
            self.gamma,
            self.natural,
            self.adversarial,
            self.success
        )
    }
}

/// The infected-balls sample size at the smallest positive noise rate of
/// the grid, shared by every cell so noiseless controls see the same `m`.
pub fn sample_size(cfg: &ExperimentConfig) -> Result<usize> {
    let z = cfg.distribution.interval_zeta_size()?;
    let eta = cfg
        .sweep
        .eta
        .iter()
        .copied()
        .filter(|&e| e > 0.0)
        .reduce(f64::min)
        .ok_or_else(|| HarnessError::Config("the infected-balls bound needs a positive noise rate".into()))?;
    let c2 = cfg.sweep.c2.unwrap_or(1.0 / z as f64);
    Ok(bound_infected(z, eta, c2, cfg.sweep.delta)?.value as usize)
}

/// The radius at which the theorem speaks: twice the ball radius.
pub const INFECTED_GAMMA: f64 = 2.0 * INTERVAL_HALF_WIDTH;

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<InfectedRow>> {
    let m = sample_size(cfg)?;
    let mut jobs = Vec::new();
    for &eta in &cfg.sweep.eta {
        for trial in 0..cfg.trials {
            jobs.push((eta, trial));
        }
    }
    let per_job = ordered(&jobs, |&(eta, trial)| {
        let seed = trial_seed(cfg, trial);
        let model = cfg.distribution.interval_parity(derive(seed, 0))?;
        let clean = model.sample(m, derive(seed, 1))?;
        let noisy = inject_label_noise(&clean, eta, derive(seed, 2))?;
        let infected: BTreeSet<i64> = noisy
            .samples()
            .iter()
            .filter(|s| s.flipped)
            .map(|s| s.x.coords()[0].round() as i64)
            .collect();
        let nn = NearestNeighborModel::fit(noisy.view())?;
        let h = Hypothesis::NearestNeighbor(nn);
        let line = h.as_line().expect("one-dimensional nearest neighbour has an exact view");
        cfg.sweep
            .gamma
            .iter()
            .map(|&gamma| {
                let (natural, adversarial) = interval_risks(line, &model, gamma)?;
                Ok(InfectedRow {
                    trial,
                    eta,
                    m,
                    infected: infected.len(),
                    intervals: model.zeta().len(),
                    gamma,
                    natural,
                    adversarial,
                    success: adversarial >= cfg.sweep.c1 - 1e-12,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(per_job.into_iter().flatten().collect())
}
