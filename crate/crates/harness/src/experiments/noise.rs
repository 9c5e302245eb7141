//! Adversarial error against label noise on the two-prototype task.

use noisylab::neural::train_natural;
use noisylab::risk::{empirical_adv_risk, natural_risk};
use noisylab::Seed;

use super::{derive, ordered, trial_seed};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::CsvRow;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRow {
    pub sigma: f64,
    pub eta: f64,
    pub trial: usize,
    pub train_err: f64,
    pub test_err: f64,
    pub adv_err: f64,
    pub epochs: usize,
}

impl CsvRow for NoiseRow {
    const HEADER: &'static str = "sigma,eta,trial,train_err,test_err,adv_err,epochs";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.sigma, self.eta, self.trial, self.train_err, self.test_err, self.adv_err, self.epochs
        )
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<NoiseRow>> {
    let arch = cfg.learner.architecture()?;
    let mut jobs = Vec::new();
    for &sigma in &cfg.sweep.sigma {
        for &eta in &cfg.sweep.eta {
            for trial in 0..cfg.trials {
                jobs.push((sigma, eta, trial));
            }
        }
    }
    ordered(&jobs, |&(sigma, eta, trial)| {
        // Trial seeds are shared across cells, so cells differ only in
        // (sigma, eta) for a given trial.
        let model = cfg.distribution.prototypes(sigma, Seed(cfg.seed))?;
        let seed = trial_seed(cfg, trial);
        let train = model.sample(cfg.learner.train_size, eta, derive(seed, 1))?;
        let test = model.sample(cfg.learner.test_size, 0.0, derive(seed, 2))?;
        let out = train_natural(train.view(), &arch, &cfg.learner.train_config(derive(seed, 3).0))?;
        let adv = empirical_adv_risk(&out.net, &test, &cfg.attack, derive(seed, 4))?;
        Ok(NoiseRow {
            sigma,
            eta,
            trial,
            train_err: out.net.error_rate(&train)?,
            test_err: natural_risk(&out.net, &test)?,
            adv_err: adv.adversarial,
            epochs: out.trace.len(),
        })
    })
}
