//! Both classical learners on noisy interval-parity samples of the
//! representation-bound size, scored exactly.

use noisylab::data::inject_label_noise;
use noisylab::learners::{bound_thm3_support, learn_parity, learn_union_intervals, Hypothesis};
use noisylab::risk::{exact_adv_risk_interval, exact_natural_risk_interval, natural_risk};

use super::{derive, ordered, trial_seed};
use crate::config::{DistributionSpec, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::output::CsvRow;

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRow {
    pub trial: usize,
    pub eta: f64,
    pub m: usize,
    pub learner: &'static str,
    pub train_err: f64,
    pub gamma: f64,
    pub natural: f64,
    pub adversarial: f64,
}

impl CsvRow for VerificationRow {
    const HEADER: &'static str = "trial,eta,m,learner,train_err,gamma,natural,adversarial";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.trial, self.eta, self.m, self.learner, self.train_err, self.gamma, self.natural, self.adversarial
        )
    }
}

/// Sample size for noise rate `eta`: the representation bound with the
/// configured radius and the support size of the distribution.
pub fn sample_size(cfg: &ExperimentConfig, eta: f64) -> Result<usize> {
    let gamma = cfg
        .sweep
        .bound_gamma()
        .ok_or_else(|| HarnessError::Config("the sample-size bound needs a positive radius".into()))?;
    // The bound needs eta > 0; noiseless cells reuse the smallest noisy one.
    let eta = if eta > 0.0 {
        eta
    } else {
        cfg.sweep.eta.iter().copied().filter(|&e| e > 0.0).reduce(f64::min).unwrap_or(0.01)
    };
    Ok(bound_thm3_support(cfg.distribution.interval_zeta_size()?, eta, gamma, cfg.sweep.delta)?.value as usize)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<VerificationRow>> {
    let DistributionSpec::IntervalParity { n, .. } = cfg.distribution else {
        return Err(HarnessError::Config("learner verification needs an interval-parity distribution".into()));
    };
    let mut jobs = Vec::new();
    for &eta in &cfg.sweep.eta {
        for trial in 0..cfg.trials {
            jobs.push((eta, trial));
        }
    }
    let per_job = ordered(&jobs, |&(eta, trial)| {
        let seed = trial_seed(cfg, trial);
        let model = cfg.distribution.interval_parity(derive(seed, 0))?;
        let m = sample_size(cfg, eta)?;
        let clean = model.sample(m, derive(seed, 1))?;
        let noisy = inject_label_noise(&clean, eta, derive(seed, 2))?;
        let union = Hypothesis::Intervals(learn_union_intervals(noisy.view())?);
        let parity = Hypothesis::Parity(learn_parity(noisy.view(), n)?.hypothesis);
        let mut rows = Vec::new();
        for (learner, h) in [("union-of-intervals", &union), ("parity", &parity)] {
            let train_err = natural_risk(h, &noisy)?;
            let natural = exact_natural_risk_interval(h, &model)?;
            for &gamma in &cfg.sweep.gamma {
                rows.push(VerificationRow {
                    trial,
                    eta,
                    m,
                    learner,
                    train_err,
                    gamma,
                    natural,
                    adversarial: exact_adv_risk_interval(h, &model, gamma)?,
                });
            }
        }
        Ok(rows)
    })?;
    Ok(per_job.into_iter().flatten().collect())
}
