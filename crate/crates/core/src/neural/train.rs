use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{argmax, batch_xent, count_errors, Mlp};
use crate::data::{Seed, TrainView};
use crate::error::{invalid, Result};
use crate::risk::{pgd_batch, AttackConfig};

/// Hidden-layer widths; input and output widths come from the data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub hidden: Vec<usize>,
}

impl Architecture {
    pub fn new(hidden: Vec<usize>) -> Result<Self> {
        if hidden.contains(&0) {
            return Err(invalid("hidden widths must be positive"));
        }
        Ok(Self { hidden })
    }

    pub fn shallow() -> Self {
        Self { hidden: vec![100, 100] }
    }

    pub fn shallow_wide() -> Self {
        Self { hidden: vec![1000, 1000] }
    }

    pub fn deep() -> Self {
        Self { hidden: vec![100; 4] }
    }

    pub fn toy_mnist() -> Self {
        Self { hidden: vec![256; 4] }
    }

    /// `shallow`, `shallow-wide`, `deep`, `toy-mnist`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "shallow" => Some(Self::shallow()),
            "shallow-wide" => Some(Self::shallow_wide()),
            "deep" => Some(Self::deep()),
            "toy-mnist" => Some(Self::toy_mnist()),
            _ => None,
        }
    }

    pub fn widths(&self, input: usize, classes: usize) -> Vec<usize> {
        let mut w = vec![input];
        w.extend(&self.hidden);
        w.push(classes);
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// `(first epoch, lr)` pairs, sorted; the first entry starts at epoch 0.
    pub lr_schedule: Vec<(usize, f64)>,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
    /// Stop at the first epoch whose training error is zero.
    pub stop_at_zero_error: bool,
    /// Fold per-coordinate mean/std standardization of the training inputs
    /// into the network.
    #[serde(default)]
    pub standardize_inputs: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { lr_schedule: vec![(0, 0.1)], batch_size: 128, epochs: 60, seed: 0, shuffle: true, stop_at_zero_error: true, standardize_inputs: false }
    }
}

impl TrainConfig {
    pub fn constant(lr: f64, batch_size: usize, epochs: usize, seed: u64) -> Self {
        Self { lr_schedule: vec![(0, lr)], batch_size, epochs, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(invalid("batch size must be at least 1"));
        }
        match self.lr_schedule.first() {
            Some((0, _)) => {}
            _ => return Err(invalid("learning-rate schedule must start at epoch 0")),
        }
        if self.lr_schedule.windows(2).any(|p| p[0].0 >= p[1].0) {
            return Err(invalid("learning-rate schedule epochs must increase"));
        }
        // lr = 0 is allowed: it freezes the weights, which is handy as a control.
        if self.lr_schedule.iter().any(|&(_, lr)| !(lr >= 0.0 && lr.is_finite())) {
            return Err(invalid("learning rates must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.lr_schedule.iter().rev().find(|(e, _)| *e <= epoch).map(|p| p.1).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub net: Mlp,
    pub trace: Vec<EpochStats>,
    /// Whether the final weights have zero clean training error.
    pub reached_zero_error: bool,
}

impl TrainOutcome {
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epoch,train_loss,train_acc")?;
        for s in &self.trace {
            writeln!(w, "{},{:.10},{:.6}", s.epoch, s.train_loss, s.train_acc)?;
        }
        Ok(())
    }
}

const INIT_STREAM: u64 = 0;
const SHUFFLE_STREAM: u64 = 1;
const ATTACK_STREAM: u64 = 2;

pub fn train_natural(view: TrainView<'_>, arch: &Architecture, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train(view, arch, cfg, None)
}

/// Each mini-batch is replaced by its PGD perturbation before the step.
pub fn train_adversarial(
    view: TrainView<'_>,
    arch: &Architecture,
    cfg: &TrainConfig,
    attack: &AttackConfig,
) -> Result<TrainOutcome> {
    attack.validate()?;
    train(view, arch, cfg, Some(attack))
}

fn train(
    view: TrainView<'_>,
    arch: &Architecture,
    cfg: &TrainConfig,
    attack: Option<&AttackConfig>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if view.is_empty() {
        return Err(invalid("cannot train on an empty dataset"));
    }
    let (d, c) = (view.dim(), view.num_classes());
    let seed = Seed(cfg.seed);
    let init: u64 = seed.stream(INIT_STREAM).random();
    let mut net = Mlp::new(&arch.widths(d, c), Seed(init))?;
    if cfg.standardize_inputs {
        let (shift, scale) = input_moments(view);
        net.set_input_standardization(shift, scale)?;
    }
    fit(net, view, cfg, attack)
}

/// Per-coordinate mean and inverse standard deviation (constant coordinates
/// keep scale 1).
fn input_moments(view: TrainView<'_>) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (view.len() as f64, view.dim());
    let mut mean = vec![0.0; d];
    for (x, _) in view.iter() {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v / n;
        }
    }
    let mut var = vec![0.0; d];
    for (x, _) in view.iter() {
        for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
            *s += (v - m).powi(2) / n;
        }
    }
    let scale = var.into_iter().map(|v| if v > 1e-24 { 1.0 / v.sqrt() } else { 1.0 }).collect();
    (mean, scale)
}

/// Continue training an existing network.
pub fn fit(mut net: Mlp, view: TrainView<'_>, cfg: &TrainConfig, attack: Option<&AttackConfig>) -> Result<TrainOutcome> {
    cfg.validate()?;
    if view.is_empty() {
        return Err(invalid("cannot train on an empty dataset"));
    }
    let (d, c) = (view.dim(), view.num_classes());
    if net.input_dim() != d || net.num_classes() < c {
        return Err(invalid("network shape does not fit the dataset"));
    }
    let seed = Seed(cfg.seed);
    let mut shuffle_rng = seed.stream(SHUFFLE_STREAM);
    let mut attack_rng = seed.stream(ATTACK_STREAM);
    let mut order: Vec<usize> = (0..view.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut grads = net.zero_grads();
    let mut xs = Vec::with_capacity(cfg.batch_size * d);
    let mut ys = Vec::with_capacity(cfg.batch_size);
    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        let lr = cfg.lr_at(epoch);
        let (mut loss_sum, mut wrong) = (0.0, 0usize);
        for batch in order.chunks(cfg.batch_size) {
            xs.clear();
            ys.clear();
            for &i in batch {
                xs.extend_from_slice(view.x(i));
                ys.push(view.y(i));
            }
            if let Some(a) = attack {
                if a.epsilon > 0.0 {
                    xs = pgd_batch(&net, &xs, &ys, a, &mut attack_rng);
                }
            }
            let cache = net.forward_cache(&xs, ys.len());
            let logits = cache.logits();
            wrong += logits.chunks_exact(net.num_classes()).zip(&ys).filter(|(r, &y)| argmax(r) != y).count();
            let (loss, dlogits) = batch_xent(logits, &ys, net.num_classes(), 1.0 / ys.len() as f64);
            loss_sum += loss * ys.len() as f64;
            for l in &mut grads.layers {
                l.w.fill(0.0);
                l.b.fill(0.0);
            }
            net.backward(&cache, dlogits, Some(&mut grads), false);
            if lr > 0.0 {
                for (l, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
                    for (p, gp) in l.w.iter_mut().zip(&g.w) {
                        *p -= lr * gp;
                    }
                    for (p, gp) in l.b.iter_mut().zip(&g.b) {
                        *p -= lr * gp;
                    }
                }
            }
        }
        let n = view.len() as f64;
        trace.push(EpochStats { epoch, train_loss: loss_sum / n, train_acc: 1.0 - wrong as f64 / n });
        // The running count mixes weights from across the epoch; confirm
        // with a clean pass at the final weights before stopping.
        if cfg.stop_at_zero_error && wrong == 0 && count_errors(&net, view.iter(), d) == 0 {
            return Ok(TrainOutcome { net, trace, reached_zero_error: true });
        }
    }
    let clean = count_errors(&net, view.iter(), d) == 0;
    Ok(TrainOutcome { net, trace, reached_zero_error: clean })
}
