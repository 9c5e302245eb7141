//! Decision regions of several networks and of 1-NN on a blob world,
//! rasterized, plus each model's grid-measured margin around every blob.

use noisylab::learners::{Classifier, NearestNeighborModel};
use noisylab::neural::{train_adversarial, train_natural};

use super::{derive, ordered, trial_seed};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{csv_artifact, header_lines, Artifact, BoundaryRaster, CsvRow};

#[derive(Debug, Clone, PartialEq)]
pub struct MarginRow {
    pub trial: usize,
    pub model: String,
    pub train_err: f64,
    pub blob: usize,
    pub label: usize,
    pub radius: f64,
    pub margin: f64,
}

impl CsvRow for MarginRow {
    const HEADER: &'static str = "trial,model,train_err,blob,label,radius,margin";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.trial, self.model, self.train_err, self.blob, self.label, self.radius, self.margin
        )
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryOutput {
    pub rasters: Vec<(usize, String, BoundaryRaster)>,
    pub margins: Vec<MarginRow>,
    pub num_classes: usize,
}

/// Square window around every blob with a quarter of the span as padding.
pub fn window(world: &noisylab::distributions::BlobWorld) -> ((f64, f64), (f64, f64)) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in world.circles() {
        x0 = x0.min(c.center[0] - c.radius);
        x1 = x1.max(c.center[0] + c.radius);
        y0 = y0.min(c.center[1] - c.radius);
        y1 = y1.max(c.center[1] + c.radius);
    }
    let half = (x1 - x0).max(y1 - y0) * 0.75;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    ((cx - half, cx + half), (cy - half, cy + half))
}

pub fn run(cfg: &ExperimentConfig) -> Result<BoundaryOutput> {
    let world = cfg.distribution.blobs()?;
    let archs = cfg.learner.named_architectures()?;
    let (xr, yr) = window(&world);
    let res = cfg.sweep.raster_resolution;
    let trials: Vec<usize> = (0..cfg.trials).collect();
    let per_trial = ordered(&trials, |&trial| {
        let seed = trial_seed(cfg, trial);
        let train = world.sample(cfg.learner.train_size, derive(seed, 1))?;
        let tcfg = cfg.learner.train_config(derive(seed, 3).0);
        let mut models: Vec<(String, Box<dyn Classifier>)> = Vec::new();
        for (name, arch) in &archs {
            models.push((format!("nat-{name}"), Box::new(train_natural(train.view(), arch, &tcfg)?.net)));
            if cfg.attack.epsilon > 0.0 {
                let at = train_adversarial(train.view(), arch, &tcfg, &cfg.attack)?;
                models.push((format!("at-{name}"), Box::new(at.net)));
            }
        }
        models.push(("1-nn".into(), Box::new(NearestNeighborModel::fit(train.view())?)));
        let mut rasters = Vec::new();
        let mut margins = Vec::new();
        for (name, h) in models {
            let raster = BoundaryRaster::render(h.as_ref(), xr, yr, res);
            let train_err = noisylab::risk::natural_risk(h.as_ref(), &train)?;
            for (blob, c) in world.circles().iter().enumerate() {
                margins.push(MarginRow {
                    trial,
                    model: name.clone(),
                    train_err,
                    blob,
                    label: c.label,
                    radius: c.radius,
                    margin: raster.margin_to_disk(c.center, c.radius, c.label),
                });
            }
            rasters.push((trial, name, raster));
        }
        Ok((rasters, margins))
    })?;
    let mut out = BoundaryOutput { rasters: Vec::new(), margins: Vec::new(), num_classes: world.num_classes() };
    for (r, m) in per_trial {
        out.rasters.extend(r);
        out.margins.extend(m);
    }
    Ok(out)
}

pub fn artifacts(cfg: &ExperimentConfig, out: &BoundaryOutput) -> Vec<Artifact> {
    let mut files = vec![csv_artifact(cfg, "boundary-raster.csv", &out.margins)];
    for (trial, name, raster) in &out.rasters {
        let mut header = header_lines(cfg);
        header.push(format!("model: {name}, trial {trial}"));
        files.push(Artifact { name: format!("raster-{name}-t{trial}.pgm"), contents: raster.to_pgm(&header, out.num_classes) });
        files.push(Artifact { name: format!("raster-{name}-t{trial}.csv"), contents: raster.to_csv(&header) });
    }
    files
}

/// Smallest margin of `model` over all blobs of one trial.
pub fn min_margin(rows: &[MarginRow], trial: usize, model: &str) -> Option<f64> {
    rows.iter().filter(|r| r.trial == trial && r.model == model).map(|r| r.margin).reduce(f64::min)
}
