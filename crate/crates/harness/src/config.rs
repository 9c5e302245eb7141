//! Experiment configuration files.
//!
//! One TOML file per run, with `[distribution]`, `[learner]`, `[attack]`
//! and `[sweep]` tables. Everything except `experiment` and the
//! distribution has a default.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use noisylab::distributions::{
    synthetic_prototypes, BlobWorld, Circle, IntervalParityModel, ParityBallModel, PrototypeNoiseModel,
    SYNTHETIC_PROTOTYPE_DIM,
};
use noisylab::mnist::load_mnist_prototypes;
use noisylab::neural::{Architecture, TrainConfig};
use noisylab::risk::AttackConfig;
use noisylab::Seed;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NoiseSweep,
    RepresentationDuel,
    LearnerVerification,
    InfectedBalls,
    BoundaryRaster,
    Fine2coarse,
    MajorityMc,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::NoiseSweep,
        ExperimentKind::RepresentationDuel,
        ExperimentKind::LearnerVerification,
        ExperimentKind::InfectedBalls,
        ExperimentKind::BoundaryRaster,
        ExperimentKind::Fine2coarse,
        ExperimentKind::MajorityMc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::NoiseSweep => "noise-sweep",
            ExperimentKind::RepresentationDuel => "representation-duel",
            ExperimentKind::LearnerVerification => "learner-verification",
            ExperimentKind::InfectedBalls => "infected-balls",
            ExperimentKind::BoundaryRaster => "boundary-raster",
            ExperimentKind::Fine2coarse => "fine2coarse",
            ExperimentKind::MajorityMc => "majority-mc",
        }
    }

    /// The distribution family the experiment runs on.
    fn expects(self) -> &'static str {
        match self {
            ExperimentKind::NoiseSweep => "prototypes",
            ExperimentKind::RepresentationDuel | ExperimentKind::Fine2coarse => "parity-balls",
            ExperimentKind::LearnerVerification | ExperimentKind::InfectedBalls | ExperimentKind::MajorityMc => {
                "interval-parity"
            }
            ExperimentKind::BoundaryRaster => "blobs",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment `{s}`")))
    }
}

fn default_ball_radius() -> f64 {
    1.0 / (2.0 * 2f64.sqrt()) - 0.008
}

fn default_k() -> usize {
    6
}

fn default_dim() -> usize {
    SYNTHETIC_PROTOTYPE_DIM
}

fn default_digits() -> [u8; 2] {
    [0, 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlobLayout {
    /// Two classes on a staggered set of circles of unequal size.
    #[default]
    Boundary,
    /// One large circle per class plus a tiny one of the other class just
    /// off its edge.
    RareSubpopulation,
}

impl BlobLayout {
    pub fn circles(self) -> Vec<Circle> {
        let c = |x: f64, y: f64, radius: f64, label: usize| Circle { center: [x, y], radius, label };
        match self {
            BlobLayout::Boundary => vec![
                c(-2.0, 1.5, 0.6, 0),
                c(0.0, 1.6, 0.35, 1),
                c(2.0, 1.4, 0.5, 0),
                c(-1.2, 0.0, 0.4, 1),
                c(0.9, -0.1, 0.55, 0),
                c(2.6, -0.3, 0.3, 1),
                c(-2.3, -1.5, 0.45, 0),
                c(-0.3, -1.6, 0.6, 1),
                c(1.8, -1.8, 0.4, 1),
            ],
            BlobLayout::RareSubpopulation => vec![
                c(-1.5, 0.0, 1.0, 0),
                c(1.5, 0.0, 1.0, 1),
                c(0.4, 0.0, 0.05, 0),
                c(-0.4, 0.0, 0.05, 1),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrototypeSource {
    /// Fixed synthetic images of dimension `dim`.
    #[default]
    Synthetic,
    /// One random image of each digit in `digits` from IDX files.
    Mnist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionSpec {
    ParityBalls {
        #[serde(default = "default_ball_radius")]
        r: f64,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default)]
        orientation: u8,
    },
    /// Explicit `parity_set`/`zeta` fix the model; otherwise each trial draws
    /// a random model with `zeta_size` centers (default `2n`).
    IntervalParity {
        n: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zeta_size: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parity_set: Option<Vec<u32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zeta: Option<Vec<u64>>,
    },
    Blobs {
        #[serde(default)]
        layout: BlobLayout,
        /// Overrides the layout when non-empty.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        circles: Vec<Circle>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Prototypes {
        #[serde(default)]
        source: PrototypeSource,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        images: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<PathBuf>,
        #[serde(default = "default_digits")]
        digits: [u8; 2],
    },
}

impl DistributionSpec {
    fn kind(&self) -> &'static str {
        match self {
            DistributionSpec::ParityBalls { .. } => "parity-balls",
            DistributionSpec::IntervalParity { .. } => "interval-parity",
            DistributionSpec::Blobs { .. } => "blobs",
            DistributionSpec::Prototypes { .. } => "prototypes",
        }
    }

    pub fn parity_balls(&self) -> Result<ParityBallModel> {
        match *self {
            DistributionSpec::ParityBalls { r, k, orientation } => Ok(ParityBallModel::new(r, k, orientation)?),
            _ => Err(self.wrong_kind("parity-balls")),
        }
    }

    pub fn interval_zeta_size(&self) -> Result<usize> {
        match self {
            DistributionSpec::IntervalParity { n, zeta_size, zeta, .. } => {
                Ok(zeta.as_ref().map(Vec::len).or(*zeta_size).unwrap_or(2 * *n as usize))
            }
            _ => Err(self.wrong_kind("interval-parity")),
        }
    }

    /// The model for one trial; random parts are drawn from `seed`.
    pub fn interval_parity(&self, seed: Seed) -> Result<IntervalParityModel> {
        match self {
            DistributionSpec::IntervalParity { n, zeta_size, parity_set, zeta } => {
                let random = IntervalParityModel::random(*n, zeta.as_ref().map(Vec::len).or(*zeta_size).unwrap_or(2 * *n as usize), seed)?;
                let set = parity_set.clone().unwrap_or_else(|| random.parity_set().to_vec());
                let zeta = zeta.clone().unwrap_or_else(|| random.zeta().to_vec());
                Ok(IntervalParityModel::new(*n, set, zeta)?)
            }
            _ => Err(self.wrong_kind("interval-parity")),
        }
    }

    pub fn blobs(&self) -> Result<BlobWorld> {
        match self {
            DistributionSpec::Blobs { layout, circles, weights } => {
                let circles = if circles.is_empty() { layout.circles() } else { circles.clone() };
                Ok(BlobWorld::new(circles, weights.clone())?)
            }
            _ => Err(self.wrong_kind("blobs")),
        }
    }

    /// Prototype model at noise level `sigma`. MNIST prototypes are drawn
    /// with `seed`.
    pub fn prototypes(&self, sigma: f64, seed: Seed) -> Result<PrototypeNoiseModel> {
        match self {
            DistributionSpec::Prototypes { source, dim, images, labels, digits } => {
                let (p0, p1) = match source {
                    PrototypeSource::Synthetic => synthetic_prototypes(*dim)?,
                    PrototypeSource::Mnist => {
                        let (Some(images), Some(labels)) = (images, labels) else {
                            return Err(HarnessError::Config("mnist prototypes need `images` and `labels` paths".into()));
                        };
                        load_mnist_prototypes(images, labels, digits[0], digits[1], seed)?
                    }
                };
                Ok(PrototypeNoiseModel::new(p0, p1, sigma)?)
            }
            _ => Err(self.wrong_kind("prototypes")),
        }
    }

    fn wrong_kind(&self, want: &str) -> HarnessError {
        HarnessError::Config(format!("expected a `{want}` distribution, found `{}`", self.kind()))
    }
}

fn default_hidden() -> Vec<usize> {
    Architecture::toy_mnist().hidden
}

fn default_architectures() -> Vec<String> {
    ["shallow", "shallow-wide", "deep"].map(String::from).to_vec()
}

fn default_schedule() -> Vec<(usize, f64)> {
    vec![(0, 0.1)]
}

fn default_batch() -> usize {
    128
}

fn default_epochs() -> usize {
    60
}

fn default_true() -> bool {
    true
}

fn default_train_size() -> usize {
    4000
}

fn default_test_size() -> usize {
    1000
}

fn default_perceptron_epochs() -> usize {
    noisylab::learners::DEFAULT_PERCEPTRON_EPOCHS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    /// Hidden widths of the single-network experiments.
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    /// Named architectures of the boundary experiment.
    #[serde(default = "default_architectures")]
    pub architectures: Vec<String>,
    #[serde(default = "default_schedule")]
    pub lr_schedule: Vec<(usize, f64)>,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_true")]
    pub shuffle: bool,
    #[serde(default = "default_true")]
    pub stop_at_zero_error: bool,
    #[serde(default)]
    pub standardize_inputs: bool,
    #[serde(default = "default_train_size")]
    pub train_size: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_perceptron_epochs")]
    pub perceptron_epochs: usize,
}

impl Default for LearnerSpec {
    fn default() -> Self {
        toml::from_str("").expect("every learner field has a default")
    }
}

impl LearnerSpec {
    pub fn architecture(&self) -> Result<Architecture> {
        Ok(Architecture::new(self.hidden.clone())?)
    }

    pub fn named_architectures(&self) -> Result<Vec<(String, Architecture)>> {
        self.architectures
            .iter()
            .map(|name| {
                Architecture::named(name)
                    .map(|a| (name.clone(), a))
                    .ok_or_else(|| HarnessError::Config(format!("unknown architecture `{name}`")))
            })
            .collect()
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            lr_schedule: self.lr_schedule.clone(),
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
            shuffle: self.shuffle,
            stop_at_zero_error: self.stop_at_zero_error,
            standardize_inputs: self.standardize_inputs,
        }
    }
}

fn default_eta() -> Vec<f64> {
    vec![0.0]
}

fn default_gamma() -> Vec<f64> {
    vec![0.0]
}

fn default_sigma() -> Vec<f64> {
    vec![1.0]
}

fn default_delta() -> f64 {
    0.1
}

fn default_c1() -> f64 {
    1.0
}

fn default_resolution() -> usize {
    16
}

fn default_raster() -> usize {
    128
}

fn default_eval_size() -> usize {
    500
}

fn default_runs() -> usize {
    10_000
}

fn default_m_scale() -> Vec<f64> {
    vec![1.0]
}

fn default_min_count() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_eta")]
    pub eta: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: Vec<f64>,
    #[serde(default = "default_sigma")]
    pub sigma: Vec<f64>,
    /// Failure probability fed to the sample-size bounds.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Radius used inside the representation bound; defaults to the
    /// smallest positive entry of `gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_gamma: Option<f64>,
    /// Per-interval mass floor of the infected-balls bound; defaults to `1/|zeta|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    /// Adversarial-risk target of the infected-balls run.
    #[serde(default = "default_c1")]
    pub c1: f64,
    /// Lattice points per half-axis of the grid oracle.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Raster side length of the boundary experiment.
    #[serde(default = "default_raster")]
    pub raster_resolution: usize,
    /// Fresh points for grid evaluation.
    #[serde(default = "default_eval_size")]
    pub eval_size: usize,
    /// Monte-Carlo repetitions of the concentration checks.
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Multiples of the bound value at which the concentration checks run.
    #[serde(default = "default_m_scale")]
    pub m_scale: Vec<f64>,
    /// Per-interval count of the occupancy check.
    #[serde(default = "default_min_count")]
    pub min_count: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        toml::from_str("").expect("every sweep field has a default")
    }
}

impl SweepSpec {
    pub fn bound_gamma(&self) -> Option<f64> {
        self.bound_gamma.or_else(|| self.gamma.iter().copied().filter(|&g| g > 0.0).reduce(f64::min))
    }
}

fn default_trials() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub distribution: DistributionSpec,
    #[serde(default)]
    pub learner: LearnerSpec,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default)]
    pub sweep: SweepSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    /// SHA-256 of the canonical serialization, leaving out where results
    /// are written.
    pub fn hash(&self) -> String {
        let canonical = Self { out: None, ..self.clone() };
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let want = self.experiment.expects();
        if self.distribution.kind() != want {
            return bad(format!(
                "{} runs on a `{want}` distribution, not `{}`",
                self.experiment,
                self.distribution.kind()
            ));
        }
        let s = &self.sweep;
        for (name, grid) in [("eta", &s.eta), ("gamma", &s.gamma), ("sigma", &s.sigma), ("m_scale", &s.m_scale)] {
            if grid.is_empty() {
                return bad(format!("sweep grid `{name}` is empty"));
            }
        }
        if let Some(&e) = s.eta.iter().find(|&&e| !(0.0..0.5).contains(&e)) {
            return bad(format!("noise rate {e} outside [0, 1/2)"));
        }
        if let Some(&g) = s.gamma.iter().find(|&&g| !(g >= 0.0 && g.is_finite())) {
            return bad(format!("radius {g} must be finite and non-negative"));
        }
        if let Some(&g) = s.sigma.iter().find(|&&g| !(g >= 0.0 && g.is_finite())) {
            return bad(format!("noise level {g} must be finite and non-negative"));
        }
        if let Some(&g) = s.m_scale.iter().find(|&&g| !(g > 0.0 && g.is_finite())) {
            return bad(format!("sample-size multiple {g} must be positive"));
        }
        if !(s.delta > 0.0 && s.delta < 1.0) {
            return bad(format!("delta = {} outside (0, 1)", s.delta));
        }
        if s.eval_size == 0 || s.runs == 0 || s.raster_resolution < 2 {
            return bad("eval_size and runs must be positive and raster_resolution at least 2".into());
        }
        let l = &self.learner;
        if l.train_size == 0 || l.test_size == 0 {
            return bad("train_size and test_size must be positive".into());
        }
        l.architecture()?;
        l.named_architectures()?;
        l.train_config(0).validate()?;
        self.attack.validate()?;
        self.validate_distribution()
    }

    fn validate_distribution(&self) -> Result<()> {
        match &self.distribution {
            DistributionSpec::ParityBalls { .. } => {
                self.distribution.parity_balls()?;
            }
            DistributionSpec::IntervalParity { .. } => {
                self.distribution.interval_parity(Seed(self.seed))?;
            }
            DistributionSpec::Blobs { .. } => {
                self.distribution.blobs()?;
            }
            DistributionSpec::Prototypes { source, .. } => {
                // MNIST files are only opened at run time.
                if *source == PrototypeSource::Synthetic {
                    for &sigma in &self.sweep.sigma {
                        self.distribution.prototypes(sigma, Seed(self.seed))?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
experiment = "noise-sweep"
trials = 2
seed = 7

[distribution]
kind = "prototypes"
dim = 16

[learner]
hidden = [32, 32]
lr_schedule = [[0, 0.1], [10, 0.01]]
epochs = 20

[attack]
norm = "linf"
epsilon = 0.25
steps = 40

[sweep]
eta = [0.0, 0.3]
sigma = [0.5, 1.0]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::NoiseSweep);
        assert_eq!(cfg.learner.lr_schedule, vec![(0, 0.1), (10, 0.01)]);
        assert_eq!(cfg.learner.batch_size, 128);
        assert_eq!(cfg.attack.step_size, 0.01);
        let back = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn every_kind_round_trips() {
        let dists = [
            "kind = \"parity-balls\"\nk = 4",
            "kind = \"interval-parity\"\nn = 3\nparity_set = [0, 2]\nzeta = [1, 3, 5]",
            "kind = \"blobs\"\nlayout = \"rare-subpopulation\"",
            "kind = \"prototypes\"",
        ];
        for kind in ExperimentKind::ALL {
            let dist = dists.iter().find(|d| d.contains(&format!("\"{}\"", kind.expects()))).unwrap();
            let text = format!("experiment = \"{kind}\"\n[distribution]\n{dist}\n");
            let cfg = ExperimentConfig::parse(&text).unwrap();
            assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg, "{kind}");
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            SAMPLE.replace("trials = 2", "trials = 0"),
            SAMPLE.replace("eta = [0.0, 0.3]", "eta = []"),
            SAMPLE.replace("eta = [0.0, 0.3]", "eta = [0.6]"),
            SAMPLE.replace("kind = \"prototypes\"", "kind = \"parity-balls\""),
            SAMPLE.replace("epochs = 20", "epochs = 20\nepoch = 3"),
            SAMPLE.replace("lr_schedule = [[0, 0.1], [10, 0.01]]", "lr_schedule = [[5, 0.1]]"),
            SAMPLE.replace("steps = 40", "steps = 40\nrestarts = 0"),
            SAMPLE.replace("noise-sweep", "noise-swept"),
        ];
        for text in cases {
            let err = ExperimentConfig::parse(&text).unwrap_err();
            assert!(matches!(err, HarnessError::Config(_)), "{err}");
        }
    }

    #[test]
    fn interval_models_follow_the_spec() {
        let fixed = DistributionSpec::IntervalParity { n: 3, zeta_size: None, parity_set: Some(vec![0, 2]), zeta: Some(vec![1, 3]) };
        let m = fixed.interval_parity(Seed(1)).unwrap();
        assert_eq!(m.zeta(), &[1, 3]);
        assert_eq!(fixed.interval_zeta_size().unwrap(), 2);
        let random = DistributionSpec::IntervalParity { n: 8, zeta_size: Some(16), parity_set: None, zeta: None };
        let a = random.interval_parity(Seed(1)).unwrap();
        assert_eq!(a.zeta().len(), 16);
        assert_eq!(a, random.interval_parity(Seed(1)).unwrap());
        assert_ne!(a, random.interval_parity(Seed(2)).unwrap());
    }

    #[test]
    fn blob_layouts_are_valid_worlds() {
        for layout in [BlobLayout::Boundary, BlobLayout::RareSubpopulation] {
            let w = BlobWorld::new(layout.circles(), None).unwrap();
            assert_eq!(w.num_classes(), 2);
        }
    }
}
