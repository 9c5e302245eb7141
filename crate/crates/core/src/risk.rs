//! Natural and adversarial risk: exact interval and disk geometry where the
//! decision regions allow it, a lattice scan as the brute-force oracle, and
//! PGD as the empirical lower bound for networks.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Seed};
use crate::distributions::{IntervalParityModel, ParityBallModel};
use crate::error::{invalid, LabError, Result};
use crate::interval::Interval;
use crate::learners::{Classifier, Hypothesis, LineClassifier, LinearClassifier, ParityHypothesis, ParityMode};
use crate::neural::Differentiable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Linf,
    L2,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Linf => "linf",
            Norm::L2 => "l2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub norm: Norm,
    pub epsilon: f64,
    pub steps: usize,
    pub step_size: f64,
    pub random_start: bool,
    pub restarts: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self { norm: Norm::Linf, epsilon: 0.0, steps: 10, step_size: 0.01, random_start: false, restarts: 1 }
    }
}

impl AttackConfig {
    pub fn new(norm: Norm, epsilon: f64, steps: usize, step_size: f64) -> Result<Self> {
        let cfg = Self { norm, epsilon, steps, step_size, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The sup-norm adversary used on the digit prototypes.
    pub fn mnist() -> Self {
        Self { norm: Norm::Linf, epsilon: 64.0 / 255.0, steps: 400, step_size: 0.01, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!("attack radius {} must be finite and non-negative", self.epsilon)));
        }
        if self.steps > 0 && !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(invalid("step size must be positive when steps > 0"));
        }
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMethod {
    ExactInterval,
    ExactGeometry,
    Grid,
    PgdEmpirical,
    MonteCarlo,
}

impl fmt::Display for RiskMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskMethod::ExactInterval => "exact-interval",
            RiskMethod::ExactGeometry => "exact-geometry",
            RiskMethod::Grid => "grid",
            RiskMethod::PgdEmpirical => "pgd-empirical",
            RiskMethod::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub method: RiskMethod,
    pub gamma: f64,
    pub natural: f64,
    pub adversarial: f64,
    /// Evaluation points, or support pieces for the exact evaluators.
    pub n_eval: usize,
    pub resolution: Option<usize>,
    pub seed: Option<u64>,
}

impl RiskReport {
    pub const CSV_HEADER: &'static str = "method,gamma,natural,adversarial,n_eval,resolution,seed";

    pub fn new(method: RiskMethod, gamma: f64, natural: f64, adversarial: f64, n_eval: usize) -> Result<Self> {
        for v in [natural, adversarial] {
            if !(0.0..=1.0).contains(&v) {
                return Err(LabError::OutOfRange(format!("risk {v} outside [0, 1]")));
            }
        }
        // Allow float dust from the exact geometric formulas.
        if adversarial + 1e-12 < natural {
            return Err(LabError::Precondition(format!(
                "adversarial risk {adversarial} below natural risk {natural}"
            )));
        }
        Ok(Self { method, gamma, natural, adversarial: adversarial.max(natural), n_eval, resolution: None, seed: None })
    }

    pub fn with_resolution(mut self, r: usize) -> Self {
        self.resolution = Some(r);
        self
    }

    pub fn with_seed(mut self, s: u64) -> Self {
        self.seed = Some(s);
        self
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{:.10},{:.10},{},{},{}",
            self.method,
            self.gamma,
            self.natural,
            self.adversarial,
            self.n_eval,
            opt(self.resolution.map(|r| r as u64)),
            opt(self.seed)
        )
    }
}

// ---------------------------------------------------------------------------
// PGD

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn random_offset<R: Rng>(rng: &mut R, d: usize, cfg: &AttackConfig) -> Vec<f64> {
    match cfg.norm {
        Norm::Linf => (0..d).map(|_| rng.random_range(-cfg.epsilon..=cfg.epsilon)).collect(),
        Norm::L2 => {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let len = norm2(&g).max(f64::MIN_POSITIVE);
            let radius = cfg.epsilon * rng.random::<f64>().powf(1.0 / d as f64);
            g.into_iter().map(|v| v / len * radius).collect()
        }
    }
}

/// One ascent step on every row of `cur`, projected back onto each row's ball.
fn step_and_project(cur: &mut [f64], grad: &[f64], origin: &[f64], d: usize, cfg: &AttackConfig) {
    for ((c, g), o) in cur.chunks_exact_mut(d).zip(grad.chunks_exact(d)).zip(origin.chunks_exact(d)) {
        project_row(c, g, o, cfg);
    }
}

fn project_row(c: &mut [f64], g: &[f64], o: &[f64], cfg: &AttackConfig) {
    let eps = cfg.epsilon;
    match cfg.norm {
        Norm::Linf => {
            for ((ci, gi), oi) in c.iter_mut().zip(g).zip(o) {
                let s = if *gi > 0.0 {
                    1.0
                } else if *gi < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                *ci = (*ci + cfg.step_size * s).clamp(oi - eps, oi + eps);
            }
        }
        Norm::L2 => {
            let gn = norm2(g);
            if gn > 0.0 {
                for (ci, gi) in c.iter_mut().zip(g) {
                    *ci += cfg.step_size * gi / gn;
                }
            }
            let delta: Vec<f64> = c.iter().zip(o).map(|(a, b)| a - b).collect();
            let dn = norm2(&delta);
            if dn > eps {
                for ((ci, di), oi) in c.iter_mut().zip(&delta).zip(o) {
                    *ci = oi + di * (eps / dn);
                }
            }
        }
    }
}

fn within_ball(x: &[f64], o: &[f64], cfg: &AttackConfig) -> bool {
    let slack = cfg.epsilon * 1e-12 + 1e-15;
    match cfg.norm {
        Norm::Linf => x.iter().zip(o).all(|(a, b)| (a - b).abs() <= cfg.epsilon + slack),
        Norm::L2 => norm2(&x.iter().zip(o).map(|(a, b)| a - b).collect::<Vec<_>>()) <= cfg.epsilon + slack,
    }
}

fn valid_start<R: Rng>(xs: &[f64], d: usize, cfg: &AttackConfig, rng: &mut R) -> Vec<f64> {
    let mut cur = xs.to_vec();
    if cfg.random_start {
        for row in cur.chunks_exact_mut(d) {
            for (c, o) in row.iter_mut().zip(random_offset(rng, d, cfg)) {
                *c += o;
            }
        }
    }
    cur
}

/// Batched PGD returning the highest-loss iterate per row (the start counts
/// as an iterate).
pub fn pgd_batch<N: Differentiable + ?Sized, R: Rng>(
    net: &N,
    xs: &[f64],
    ys: &[usize],
    cfg: &AttackConfig,
    rng: &mut R,
) -> Vec<f64> {
    let d = net.input_dim();
    if cfg.epsilon == 0.0 || ys.is_empty() {
        return xs.to_vec();
    }
    let mut best = xs.to_vec();
    let mut best_loss = vec![f64::NEG_INFINITY; ys.len()];
    for _ in 0..cfg.restarts {
        let mut cur = valid_start(xs, d, cfg, rng);
        for step in 0..=cfg.steps {
            let (losses, grad) = net.loss_input_grad_batch(&cur, ys);
            for (i, &l) in losses.iter().enumerate() {
                if l > best_loss[i] {
                    best_loss[i] = l;
                    best[i * d..(i + 1) * d].copy_from_slice(&cur[i * d..(i + 1) * d]);
                }
            }
            if step == cfg.steps {
                break;
            }
            step_and_project(&mut cur, &grad, xs, d, cfg);
        }
    }
    for (b, o) in best.chunks_exact(d).zip(xs.chunks_exact(d)) {
        assert!(within_ball(b, o, cfg), "PGD iterate left the attack ball");
    }
    best
}

/// Single-point PGD.
pub fn pgd_attack<N: Differentiable + ?Sized>(
    net: &N,
    x: &[f64],
    y: usize,
    cfg: &AttackConfig,
    seed: Seed,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x.len() != net.input_dim() {
        return Err(LabError::DimensionMismatch { expected: net.input_dim(), got: x.len() });
    }
    if y >= net.output_dim() {
        return Err(invalid(format!("label {y} outside the model's classes")));
    }
    Ok(pgd_batch(net, x, &[y], cfg, &mut seed.rng()))
}

/// Runs PGD and flags rows where any iterate (including the clean point)
/// is misclassified. Rows stop being attacked once broken.
fn pgd_breaks<N: Differentiable + ?Sized>(net: &N, xs: &[f64], ys: &[usize], cfg: &AttackConfig, seed: Seed) -> Vec<bool> {
    let d = net.input_dim();
    let c = net.output_dim();
    let n = ys.len();
    let mut broken = vec![false; n];
    let clean = net.label_batch(xs);
    for i in 0..n {
        broken[i] = clean[i] != ys[i];
    }
    if cfg.epsilon == 0.0 {
        return broken;
    }
    for restart in 0..cfg.restarts {
        let mut active: Vec<usize> = (0..n).filter(|&i| !broken[i]).collect();
        if active.is_empty() {
            break;
        }
        let mut rng = seed.stream(restart as u64);
        let gather = |idx: &[usize], src: &[f64]| -> Vec<f64> {
            idx.iter().flat_map(|&i| src[i * d..(i + 1) * d].iter().copied()).collect()
        };
        let origin_all = xs;
        let mut origin = gather(&active, origin_all);
        let mut cur = valid_start(&origin, d, cfg, &mut rng);
        for step in 0..=cfg.steps {
            let ys_act: Vec<usize> = active.iter().map(|&i| ys[i]).collect();
            let (_, grad, logits) = net.loss_input_grad_full(&cur, &ys_act);
            let mut keep = Vec::with_capacity(active.len());
            for (k, &i) in active.iter().enumerate() {
                debug_assert!(within_ball(&cur[k * d..(k + 1) * d], &origin[k * d..(k + 1) * d], cfg));
                let row = &logits[k * c..(k + 1) * c];
                if crate::neural::argmax_row(row) != ys[i] {
                    broken[i] = true;
                } else {
                    keep.push(k);
                }
            }
            if keep.is_empty() || step == cfg.steps {
                break;
            }
            if keep.len() < active.len() {
                active = keep.iter().map(|&k| active[k]).collect();
                origin = gather(&keep, &origin);
                cur = gather(&keep, &cur);
                let g = gather(&keep, &grad);
                step_and_project(&mut cur, &g, &origin, d, cfg);
            } else {
                step_and_project(&mut cur, &grad, &origin, d, cfg);
            }
        }
    }
    broken
}

/// Fraction of test points PGD breaks, counting clean mistakes.
pub fn empirical_adv_risk<N: Differentiable + ?Sized>(
    net: &N,
    test: &Dataset,
    cfg: &AttackConfig,
    seed: Seed,
) -> Result<RiskReport> {
    cfg.validate()?;
    check_eval(net.input_dim(), test)?;
    const CHUNK: usize = 256;
    let samples = test.samples();
    let chunks: Vec<&[crate::data::Sample]> = samples.chunks(CHUNK).collect();
    let (nat, adv) = chunks
        .par_iter()
        .enumerate()
        .map(|(ci, chunk)| {
            let xs: Vec<f64> = chunk.iter().flat_map(|s| s.x.iter().copied()).collect();
            let ys: Vec<usize> = chunk.iter().map(|s| s.y).collect();
            let clean = net.label_batch(&xs);
            let nat = clean.iter().zip(&ys).filter(|(a, b)| a != b).count();
            let adv = pgd_breaks(net, &xs, &ys, cfg, seed.trial(ci as u64)).iter().filter(|&&b| b).count();
            (nat, adv)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = test.len() as f64;
    Ok(RiskReport::new(RiskMethod::PgdEmpirical, cfg.epsilon, nat as f64 / n, adv as f64 / n, test.len())?
        .with_seed(seed.0))
}

// ---------------------------------------------------------------------------
// Sample-based risks

fn check_eval(dim: usize, test: &Dataset) -> Result<()> {
    if test.is_empty() {
        return Err(invalid("empty evaluation set"));
    }
    if test.dim() != dim {
        return Err(LabError::DimensionMismatch { expected: dim, got: test.dim() });
    }
    Ok(())
}

pub fn natural_risk<H: Classifier + ?Sized>(h: &H, test: &Dataset) -> Result<f64> {
    check_eval(h.input_dim(), test)?;
    let xs: Vec<f64> = test.samples().iter().flat_map(|s| s.x.iter().copied()).collect();
    let wrong = h.label_batch(&xs).iter().zip(test.samples()).filter(|(p, s)| **p != s.y).count();
    Ok(wrong as f64 / test.len() as f64)
}

/// Lattice offsets of `{-1, ..., 1}^2 * gamma` at `2 res + 1` points per
/// axis that lie in the ball, farthest first.
pub fn grid_offsets(gamma: f64, norm: Norm, resolution: usize) -> Vec<[f64; 2]> {
    if gamma == 0.0 || resolution == 0 {
        return vec![[0.0, 0.0]];
    }
    let r = resolution as i64;
    let mut out: Vec<(i64, [f64; 2])> = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            let keep = match norm {
                Norm::Linf => true,
                Norm::L2 => i * i + j * j <= r * r,
            };
            if keep {
                let step = gamma / resolution as f64;
                out.push((i * i + j * j, [i as f64 * step, j as f64 * step]));
            }
        }
    }
    out.sort_by_key(|p| std::cmp::Reverse(p.0));
    out.into_iter().map(|p| p.1).collect()
}

/// Brute-force adversarial risk for 2D classifiers: a point is vulnerable
/// when some lattice point of its γ-ball is labeled differently from `y`.
pub fn grid_adv_risk<H: Classifier + ?Sized>(
    h: &H,
    eval_set: &Dataset,
    gamma: f64,
    norm: Norm,
    resolution: usize,
) -> Result<RiskReport> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid("radius must be finite and non-negative"));
    }
    check_eval(2, eval_set)?;
    if h.input_dim() != 2 {
        return Err(LabError::DimensionMismatch { expected: 2, got: h.input_dim() });
    }
    let offsets = grid_offsets(gamma, norm, resolution);
    const CHUNK: usize = 512;
    let (nat, adv) = eval_set
        .samples()
        .par_iter()
        .map(|s| {
            let wrong_clean = h.label_of(&s.x) != s.y;
            if wrong_clean {
                return (1usize, 1usize);
            }
            for block in offsets.chunks(CHUNK) {
                let xs: Vec<f64> = block.iter().flat_map(|o| [s.x[0] + o[0], s.x[1] + o[1]]).collect();
                if h.label_batch(&xs).iter().any(|&p| p != s.y) {
                    return (0, 1);
                }
            }
            (0, 0)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = eval_set.len() as f64;
    Ok(RiskReport::new(RiskMethod::Grid, gamma, nat as f64 / n, adv as f64 / n, eval_set.len())?
        .with_resolution(resolution))
}

// ---------------------------------------------------------------------------
// Exact interval evaluation

/// `(natural, adversarial)` measure fractions over the support of `model`.
pub fn interval_risks<H: LineClassifier + ?Sized>(h: &H, model: &IntervalParityModel, gamma: f64) -> Result<(f64, f64)> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid("radius must be finite and non-negative"));
    }
    let mut nat = 0.0;
    let mut adv = 0.0;
    for &j in model.zeta() {
        let (lo, hi) = IntervalParityModel::support_interval(j);
        let support = Interval::open(lo, hi);
        let window = Interval::closed(lo - gamma - 1.0, hi + gamma + 1.0);
        let positive = h.positive_region(window.lo, window.hi);
        let wrong = if model.label_of_integer(j as i64) == 1 {
            positive.complement().intersect_interval(window)
        } else {
            positive
        };
        nat += wrong.intersect_interval(support).measure();
        adv += wrong.dilate(gamma).intersect_interval(support).measure();
    }
    let mass = model.zeta().len() as f64 * 0.5;
    Ok(((nat / mass).clamp(0.0, 1.0), (adv / mass).clamp(0.0, 1.0)))
}

fn line_of(h: &Hypothesis) -> Result<&dyn LineClassifier> {
    h.as_line()
        .ok_or_else(|| LabError::UnsupportedHypothesis(format!("{} has no exact 1D evaluator", h.name())))
}

pub fn exact_natural_risk_interval(h: &Hypothesis, model: &IntervalParityModel) -> Result<f64> {
    Ok(interval_risks(line_of(h)?, model, 0.0)?.0)
}

/// Exact γ-adversarial risk on the interval-parity support.
pub fn exact_adv_risk_interval(h: &Hypothesis, model: &IntervalParityModel, gamma: f64) -> Result<f64> {
    Ok(interval_risks(line_of(h)?, model, gamma)?.1)
}

pub fn interval_report(h: &Hypothesis, model: &IntervalParityModel, gamma: f64) -> Result<RiskReport> {
    let (nat, adv) = interval_risks(line_of(h)?, model, gamma)?;
    RiskReport::new(RiskMethod::ExactInterval, gamma, nat, adv, model.zeta().len())
}

// ---------------------------------------------------------------------------
// Exact disk geometry

/// Fraction of a disk's area cut off by a chord at height `t r` from the rim.
pub fn circular_segment_fraction(t: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&t) {
        return Err(LabError::OutOfRange(format!("segment height ratio {t} outside [0, 2]")));
    }
    Ok(segment(t))
}

fn segment(t: f64) -> f64 {
    let u = 1.0 - t;
    ((u.acos() - u * (2.0 * t - t * t).max(0.0).sqrt()) / PI).clamp(0.0, 1.0)
}

/// Area of `{x >= s, y >= s}` inside a centered disk of radius `r`, `s >= 0`.
fn corner_area(r: f64, s: f64) -> f64 {
    if 2.0 * s * s >= r * r {
        return 0.0;
    }
    let f = |x: f64| 0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).clamp(-1.0, 1.0).asin());
    let xmax = (r * r - s * s).sqrt();
    (f(xmax) - f(s) - s * (xmax - s)).max(0.0)
}

/// Disk-area fraction within `gamma` of the four edge-adjacent unit cells,
/// for a disk centered in its cell.
fn parity_vulnerable_fraction(r: f64, gamma: f64) -> f64 {
    let s = 0.5 - gamma;
    if s <= 0.0 {
        return 1.0;
    }
    if s >= r {
        return 0.0;
    }
    let disk = PI * r * r;
    let strips = 4.0 * segment((r - s) / r) * disk;
    ((strips - 4.0 * corner_area(r, s)) / disk).clamp(0.0, 1.0)
}

/// `(natural, adversarial)` risks of a linear or planar-parity rule on the
/// parity-ball model, averaged over the equally weighted balls.
pub fn parity_ball_risks(h: &Hypothesis, model: &ParityBallModel, gamma: f64, norm: Norm) -> Result<(f64, f64)> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid("radius must be finite and non-negative"));
    }
    let balls = model.balls();
    let r = model.r();
    match h {
        Hypothesis::Linear(lin) => Ok(linear_ball_risks(lin, model, gamma, norm)),
        Hypothesis::Parity(ParityHypothesis { mode: ParityMode::Plane { .. }, .. }) => {
            if r > 0.5 {
                return Err(LabError::UnsupportedHypothesis(
                    "balls crossing their lattice cell have no closed form".into(),
                ));
            }
            // The rule is constant on each cell; for r <= 1/2 each ball sits
            // inside the cell of its center, and both norms measure the
            // distance to an axis-aligned cell edge identically.
            let mut nat = 0.0;
            let mut adv = 0.0;
            for b in &balls {
                if h.label_of(&b.center) != b.label {
                    nat += 1.0;
                    adv += 1.0;
                } else {
                    adv += parity_vulnerable_fraction(r, gamma);
                }
            }
            let k = balls.len() as f64;
            Ok((nat / k, adv / k))
        }
        other => Err(LabError::UnsupportedHypothesis(format!(
            "{} has no exact evaluator on the parity-ball model",
            other.name()
        ))),
    }
}

fn linear_ball_risks(h: &LinearClassifier, model: &ParityBallModel, gamma: f64, norm: Norm) -> (f64, f64) {
    let r = model.r();
    let wn = h.norm();
    let reach = match norm {
        Norm::L2 => gamma,
        Norm::Linf => gamma * h.w.iter().map(|v| v.abs()).sum::<f64>() / wn,
    };
    let balls = model.balls();
    let (mut nat, mut adv) = (0.0, 0.0);
    for b in &balls {
        let sign = if b.label == 1 { 1.0 } else { -1.0 };
        // Signed distance from the center toward the correct side.
        let s = sign * h.score(&b.center) / wn;
        nat += segment(((r - s) / r).clamp(0.0, 2.0));
        adv += segment(((r + reach - s) / r).clamp(0.0, 2.0));
    }
    let k = balls.len() as f64;
    (nat / k, adv / k)
}

/// Exact ℓ2 adversarial risk for a hypothesis with zero natural risk.
pub fn exact_adv_risk_parity_balls(h: &Hypothesis, model: &ParityBallModel, gamma: f64) -> Result<f64> {
    let (nat, adv) = parity_ball_risks(h, model, gamma, Norm::L2)?;
    if nat > 0.0 {
        return Err(LabError::Precondition(format!(
            "hypothesis has natural risk {nat:.6} on the model; the exact evaluator needs zero"
        )));
    }
    Ok(adv)
}

pub fn parity_ball_report(h: &Hypothesis, model: &ParityBallModel, gamma: f64, norm: Norm) -> Result<RiskReport> {
    let (nat, adv) = parity_ball_risks(h, model, gamma, norm)?;
    RiskReport::new(RiskMethod::ExactGeometry, gamma, nat, adv, model.num_components())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Point;
    use crate::interval::IntervalSet;
    use crate::learners::UnionOfIntervals;
    use crate::neural::{Layer, Mlp};
    use proptest::prelude::*;

    /// Two logits `(0, x - 0.5)`: class 1 iff x > 0.5.
    fn threshold_net() -> Mlp {
        Mlp::from_layers(vec![Layer { inputs: 1, outputs: 2, w: vec![0.0, 1.0], b: vec![0.0, -0.5] }]).unwrap()
    }

    fn mc_area(pred: impl Fn(f64, f64) -> bool, r: f64, n: usize) -> f64 {
        // Deterministic midpoint lattice over the bounding square.
        let mut hit = 0usize;
        let mut inside = 0usize;
        for i in 0..n {
            for j in 0..n {
                let x = -r + (i as f64 + 0.5) * 2.0 * r / n as f64;
                let y = -r + (j as f64 + 0.5) * 2.0 * r / n as f64;
                if x * x + y * y <= r * r {
                    inside += 1;
                    if pred(x, y) {
                        hit += 1;
                    }
                }
            }
        }
        hit as f64 / inside as f64
    }

    #[test]
    fn segment_examples() {
        assert_eq!(circular_segment_fraction(0.0).unwrap(), 0.0);
        assert!((circular_segment_fraction(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((circular_segment_fraction(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(circular_segment_fraction(0.01).unwrap() > 0.0005);
        assert!(circular_segment_fraction(2.1).is_err());
        assert!(circular_segment_fraction(-0.1).is_err());
    }

    #[test]
    fn segment_matches_lattice_count() {
        for t in [0.1, 0.4, 0.9, 1.3, 1.8] {
            let want = mc_area(|x, _| x >= 1.0 - t, 1.0, 1500);
            assert!((segment(t) - want).abs() < 2e-3, "t={t}");
        }
    }

    #[test]
    fn parity_fraction_matches_lattice_count() {
        for (r, g) in [(0.35, 0.2), (0.3, 0.3), (0.45, 0.1), (0.2, 0.45)] {
            let s: f64 = 0.5 - g;
            let want = mc_area(|x, y| x.abs() >= s || y.abs() >= s, r, 1500);
            assert!((parity_vulnerable_fraction(r, g) - want).abs() < 3e-3, "r={r} g={g}");
        }
    }

    #[test]
    fn parity_classifier_is_robust_below_the_cell_gap() {
        let r = 1.0 / (2.0 * 2f64.sqrt());
        let model = ParityBallModel::new(r, 6, 0).unwrap();
        let g = Hypothesis::Parity(ParityHypothesis::plane(1).unwrap());
        for gamma in [0.0, 0.05, 0.1, 0.145] {
            assert_eq!(exact_adv_risk_parity_balls(&g, &model, gamma).unwrap(), 0.0);
        }
        assert!(exact_adv_risk_parity_balls(&g, &model, 0.2).unwrap() > 0.0);
        let wrong = Hypothesis::Parity(ParityHypothesis::plane(0).unwrap());
        assert!(matches!(exact_adv_risk_parity_balls(&wrong, &model, 0.0), Err(LabError::Precondition(_))));
    }

    #[test]
    fn diagonal_separator_has_segment_risk() {
        let r = 1.0 / (2.0 * 2f64.sqrt()) - 0.008;
        let model = ParityBallModel::new(r, 6, 0).unwrap();
        let h = Hypothesis::Linear(LinearClassifier::new(vec![1.0, -1.0], -0.5).unwrap());
        assert_eq!(exact_adv_risk_parity_balls(&h, &model, 0.0).unwrap(), 0.0);
        let risk = exact_adv_risk_parity_balls(&h, &model, 0.021).unwrap();
        let s = 0.5 / 2f64.sqrt();
        assert!((risk - segment((r + 0.021 - s) / r)).abs() < 1e-15);
        assert!(risk >= 0.0005);
    }

    #[test]
    fn interval_strip_example() {
        let model = IntervalParityModel::new(1, vec![0], vec![1]).unwrap();
        let h = Hypothesis::Intervals(UnionOfIntervals::new(IntervalSet::from_interval(Interval::open(0.75, 1.25))));
        assert_eq!(exact_natural_risk_interval(&h, &model).unwrap(), 0.0);
        assert!((exact_adv_risk_interval(&h, &model, 0.1).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn point_patch_is_measure_zero() {
        let model = IntervalParityModel::new(2, vec![0], vec![1, 2]).unwrap();
        let base = IntervalSet::from_interval(Interval::open(0.5, 1.5));
        let patched = base.union(&IntervalSet::from_interval(Interval::point(2.1)));
        let a = Hypothesis::Intervals(UnionOfIntervals::new(base));
        let b = Hypothesis::Intervals(UnionOfIntervals::new(patched));
        for g in [0.0, 0.05, 0.1] {
            let (ra, rb) = (exact_adv_risk_interval(&a, &model, g).unwrap(), exact_adv_risk_interval(&b, &model, g).unwrap());
            if g == 0.0 {
                assert_eq!(ra, rb);
            } else {
                // The patch at 2.1 poisons a 2g-wide window around itself.
                assert!((rb - ra - 2.0 * g).abs() < 1e-12, "g={g}: {ra} {rb}");
            }
        }
        assert_eq!(exact_adv_risk_interval(&a, &model, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn interval_rejects_planar_rules() {
        let model = IntervalParityModel::new(2, vec![0], vec![1]).unwrap();
        let h = Hypothesis::Parity(ParityHypothesis::plane(1).unwrap());
        assert!(matches!(exact_adv_risk_interval(&h, &model, 0.1), Err(LabError::UnsupportedHypothesis(_))));
    }

    #[test]
    fn pgd_crosses_the_threshold() {
        let net = threshold_net();
        let cfg = AttackConfig::new(Norm::Linf, 0.1, 10, 0.02).unwrap();
        let adv = pgd_attack(&net, &[0.45], 0, &cfg, Seed(0)).unwrap();
        assert!((adv[0] - 0.55).abs() < 1e-12, "{adv:?}");
        assert_eq!(net.label_of(&adv), 1);
    }

    #[test]
    fn pgd_degenerate_cases() {
        let net = threshold_net();
        let zero = AttackConfig::new(Norm::L2, 0.0, 10, 0.02).unwrap();
        assert_eq!(pgd_attack(&net, &[0.3], 0, &zero, Seed(0)).unwrap(), vec![0.3]);
        let no_steps = AttackConfig { random_start: true, ..AttackConfig::new(Norm::Linf, 0.2, 0, 0.1).unwrap() };
        let x = pgd_attack(&net, &[0.3], 0, &no_steps, Seed(4)).unwrap();
        assert!((x[0] - 0.3).abs() <= 0.2);
    }

    #[test]
    fn empirical_risk_at_zero_radius_is_natural() {
        let net = threshold_net();
        let pts = [0.1, 0.45, 0.6, 0.9].iter().map(|&v| Point::new(vec![v]).unwrap()).collect();
        let ds = Dataset::from_points(pts, vec![0, 1, 1, 1], 2).unwrap();
        let rep = empirical_adv_risk(&net, &ds, &AttackConfig::default(), Seed(0)).unwrap();
        assert_eq!(rep.natural, 0.25);
        assert_eq!(rep.adversarial, 0.25);
        let strong = AttackConfig::new(Norm::Linf, 0.2, 20, 0.02).unwrap();
        let rep = empirical_adv_risk(&net, &ds, &strong, Seed(0)).unwrap();
        // 0.1 stays below 0.5; 0.6 and 0.45 are within reach; 0.9 is not.
        assert_eq!(rep.adversarial, 0.5);
    }

    #[test]
    fn grid_matches_exact_linear_risk() {
        let r = 0.3;
        let model = ParityBallModel::new(r, 3, 0).unwrap();
        let lin = LinearClassifier::new(vec![1.0, -0.8], -0.4).unwrap();
        let h = Hypothesis::Linear(lin);
        let eval = model.sample(20_000, Seed(9)).unwrap();
        for gamma in [0.0, 0.05, 0.15] {
            let (nat, adv) = parity_ball_risks(&h, &model, gamma, Norm::L2).unwrap();
            let grid = grid_adv_risk(&h, &eval, gamma, Norm::L2, 64).unwrap();
            assert!((grid.natural - nat).abs() < 0.01, "nat {gamma}");
            assert!((grid.adversarial - adv).abs() < 0.01, "adv {gamma}: {} vs {adv}", grid.adversarial);
        }
    }

    #[test]
    fn report_row_format() {
        let rep = RiskReport::new(RiskMethod::Grid, 0.1, 0.0, 0.25, 40).unwrap().with_resolution(8);
        assert_eq!(rep.csv_row(), "grid,0.1,0.0000000000,0.2500000000,40,8,");
        assert!(RiskReport::new(RiskMethod::Grid, 0.1, 0.3, 0.2, 1).is_err());
        assert!(RiskReport::new(RiskMethod::Grid, 0.1, 0.0, 1.2, 1).is_err());
    }

    proptest! {
        #[test]
        fn pgd_stays_in_ball(
            x in -2.0f64..2.0, y in -2.0f64..2.0, eps in 0.0f64..0.5,
            steps in 0usize..12, l2 in any::<bool>(), seed in any::<u64>(),
        ) {
            let net = Mlp::new(&[2, 6, 2], Seed(seed)).unwrap();
            let norm = if l2 { Norm::L2 } else { Norm::Linf };
            let cfg = AttackConfig { random_start: seed % 2 == 0, ..AttackConfig::new(norm, eps, steps, 0.07).unwrap() };
            let adv = pgd_attack(&net, &[x, y], 1, &cfg, Seed(seed)).unwrap();
            prop_assert!(within_ball(&adv, &[x, y], &cfg));
        }

        #[test]
        fn interval_risk_monotone_in_gamma(
            cuts in proptest::collection::vec(0.0f64..17.0, 0..12),
            set_seed in any::<u64>(), g1 in 0.0f64..0.6, g2 in 0.0f64..0.6,
        ) {
            let model = IntervalParityModel::random(4, 6, Seed(set_seed)).unwrap();
            let mut c = cuts.clone();
            c.sort_by(f64::total_cmp);
            let pairs: Vec<(f64, f64)> = c.chunks_exact(2).map(|p| (p[0], p[1])).collect();
            let h = Hypothesis::Intervals(UnionOfIntervals::from_closed(&pairs).unwrap());
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let (n0, a_lo) = interval_risks(line_of(&h).unwrap(), &model, lo).unwrap();
            let (_, a_hi) = interval_risks(line_of(&h).unwrap(), &model, hi).unwrap();
            prop_assert!(a_lo <= a_hi + 1e-12);
            prop_assert!(n0 <= a_lo + 1e-12);
            prop_assert!((interval_risks(line_of(&h).unwrap(), &model, 0.0).unwrap().1 - n0).abs() < 1e-12);
        }

        #[test]
        fn linear_ball_risk_monotone(
            a in -1.0f64..1.0, b in -1.0f64..1.0, c in -3.0f64..3.0,
            g1 in 0.0f64..0.5, g2 in 0.0f64..0.5, l2 in any::<bool>(),
        ) {
            prop_assume!(a.abs() + b.abs() > 1e-3);
            let model = ParityBallModel::new(0.3, 4, 1).unwrap();
            let h = Hypothesis::Linear(LinearClassifier::new(vec![a, b], c).unwrap());
            let norm = if l2 { Norm::L2 } else { Norm::Linf };
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let (n, x) = parity_ball_risks(&h, &model, lo, norm).unwrap();
            let (_, y) = parity_ball_risks(&h, &model, hi, norm).unwrap();
            prop_assert!(n <= x + 1e-12 && x <= y + 1e-12);
        }
    }
}
