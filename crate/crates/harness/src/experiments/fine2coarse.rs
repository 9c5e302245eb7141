//! Natural, fine-label, and adversarial training on the parity-ball model,
//! compared by grid-measured adversarial risk.
//!
//! The fine-label net is scored two ways: `multiclass` predicts the coarse
//! class of its fine argmax (each sub-population reports its parent), and
//! `multiclass-sum` sums the fine logits of each coarse class.

use noisylab::neural::{train_adversarial, train_natural, Aggregation, CoarseMap, CoarseNet};
use noisylab::risk::grid_adv_risk;

use super::{derive, ordered, trial_seed};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::CsvRow;

#[derive(Debug, Clone, PartialEq)]
pub struct Fine2CoarseRow {
    pub trial: usize,
    pub model: &'static str,
    pub train_err: f64,
    pub epochs: usize,
    pub gamma: f64,
    pub natural: f64,
    pub adversarial: f64,
}

impl CsvRow for Fine2CoarseRow {
    const HEADER: &'static str = "trial,model,train_err,epochs,gamma,natural,adversarial";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.trial, self.model, self.train_err, self.epochs, self.gamma, self.natural, self.adversarial
        )
    }
}

pub const MODELS: [&str; 4] = ["nat", "multiclass", "multiclass-sum", "at"];

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Fine2CoarseRow>> {
    let model = cfg.distribution.parity_balls()?;
    let arch = cfg.learner.architecture()?;
    let map = CoarseMap::new(model.balls().iter().map(|b| b.label).collect())?;
    let trials: Vec<usize> = (0..cfg.trials).collect();
    let per_trial = ordered(&trials, |&trial| {
        let seed = trial_seed(cfg, trial);
        let (train, components) = model.sample_with_components(cfg.learner.train_size, derive(seed, 1))?;
        let eval = model.sample(cfg.sweep.eval_size, derive(seed, 2))?;
        let tcfg = cfg.learner.train_config(derive(seed, 3).0);

        let nat = train_natural(train.view(), &arch, &tcfg)?;
        let fine = train.relabeled(&components, model.num_components())?;
        let mc = train_natural(fine.view(), &arch, &tcfg)?;
        let at = train_adversarial(train.view(), &arch, &tcfg, &cfg.attack)?;

        let max = CoarseNet::with_aggregation(mc.net.clone(), map.clone(), Aggregation::MaxLogit)?;
        let sum = CoarseNet::with_aggregation(mc.net.clone(), map.clone(), Aggregation::SumLogits)?;
        let scored: [(&'static str, &dyn noisylab::learners::Classifier, usize); 4] = [
            ("nat", &nat.net, nat.trace.len()),
            ("multiclass", &max, mc.trace.len()),
            ("multiclass-sum", &sum, mc.trace.len()),
            ("at", &at.net, at.trace.len()),
        ];
        let mut rows = Vec::new();
        for (name, h, epochs) in scored {
            let train_err = noisylab::risk::natural_risk(h, &train)?;
            for &gamma in &cfg.sweep.gamma {
                let r = grid_adv_risk(h, &eval, gamma, cfg.attack.norm, cfg.sweep.resolution)?;
                rows.push(Fine2CoarseRow {
                    trial,
                    model: name,
                    train_err,
                    epochs,
                    gamma,
                    natural: r.natural,
                    adversarial: r.adversarial,
                });
            }
        }
        Ok(rows)
    })?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Mean adversarial risk of `model` at `gamma` over all trials.
pub fn mean_adversarial(rows: &[Fine2CoarseRow], model: &str, gamma: f64) -> Option<f64> {
    let picked: Vec<f64> =
        rows.iter().filter(|r| r.model == model && r.gamma == gamma).map(|r| r.adversarial).collect();
    (!picked.is_empty()).then(|| picked.iter().sum::<f64>() / picked.len() as f64)
}
