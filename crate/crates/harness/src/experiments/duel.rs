//! Perceptron against the planar parity rule on the parity-ball model,
//! both scored exactly.

use noisylab::learners::{fit_perceptron, Hypothesis, ParityHypothesis, PerceptronOutcome};
use noisylab::risk::parity_ball_risks;

use super::{derive, ordered, trial_seed};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{opt, CsvRow};

#[derive(Debug, Clone, PartialEq)]
pub struct DuelRow {
    pub trial: usize,
    pub hypothesis: &'static str,
    /// Perceptron epochs, when it separated the sample.
    pub epochs: Option<usize>,
    pub separated: bool,
    pub gamma: f64,
    pub natural: Option<f64>,
    pub adversarial: Option<f64>,
}

impl CsvRow for DuelRow {
    const HEADER: &'static str = "trial,hypothesis,separated,epochs,gamma,natural,adversarial";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.trial,
            self.hypothesis,
            self.separated,
            opt(self.epochs),
            self.gamma,
            opt(self.natural),
            opt(self.adversarial)
        )
    }
}

/// The planar parity rule that labels `model` correctly.
pub fn matching_parity(model: &noisylab::distributions::ParityBallModel) -> Result<Hypothesis> {
    Ok(Hypothesis::Parity(ParityHypothesis::plane(1 - model.orientation())?))
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<DuelRow>> {
    let model = cfg.distribution.parity_balls()?;
    let trials: Vec<usize> = (0..cfg.trials).collect();
    let per_trial = ordered(&trials, |&trial| {
        let train = model.sample(cfg.learner.train_size, derive(trial_seed(cfg, trial), 1))?;
        let fit = fit_perceptron(train.view(), cfg.learner.perceptron_epochs)?;
        let parity = matching_parity(&model)?;
        let mut rows = Vec::new();
        for &gamma in &cfg.sweep.gamma {
            match &fit {
                PerceptronOutcome::Separated { classifier, epochs } => {
                    let h = Hypothesis::Linear(classifier.clone());
                    let (nat, adv) = parity_ball_risks(&h, &model, gamma, cfg.attack.norm)?;
                    rows.push(DuelRow {
                        trial,
                        hypothesis: "linear",
                        epochs: Some(*epochs),
                        separated: true,
                        gamma,
                        natural: Some(nat),
                        adversarial: Some(adv),
                    });
                }
                PerceptronOutcome::NotSeparated { .. } => rows.push(DuelRow {
                    trial,
                    hypothesis: "linear",
                    epochs: None,
                    separated: false,
                    gamma,
                    natural: None,
                    adversarial: None,
                }),
            }
            let (nat, adv) = parity_ball_risks(&parity, &model, gamma, cfg.attack.norm)?;
            rows.push(DuelRow {
                trial,
                hypothesis: "parity",
                epochs: None,
                separated: true,
                gamma,
                natural: Some(nat),
                adversarial: Some(adv),
            });
        }
        Ok(rows)
    })?;
    Ok(per_trial.into_iter().flatten().collect())
}
