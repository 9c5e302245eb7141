//! One module per subcommand. Each exposes a typed `run` returning rows
//! (used directly by the tests) and the dispatcher renders them to files.

pub mod boundary;
pub mod duel;
pub mod fine2coarse;
pub mod infected;
pub mod majority;
pub mod noise;
pub mod verification;

use noisylab::Seed;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::output::{csv_artifact, Artifact};

/// Independent sub-seed for `tag` under `seed` (splitmix64 finalizer).
pub fn derive(seed: Seed, tag: u64) -> Seed {
    let mut z = seed.0 ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    Seed(z ^ (z >> 31))
}

pub fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> Seed {
    Seed(cfg.seed).trial(trial as u64)
}

/// Runs `f` for every job on the worker pool and returns results in job
/// order, so output never depends on scheduling.
pub(crate) fn ordered<J: Sync, T: Send>(jobs: &[J], f: impl Fn(&J) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    jobs.par_iter().map(f).collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let name = format!("{}.csv", cfg.experiment);
    Ok(match cfg.experiment {
        ExperimentKind::NoiseSweep => vec![csv_artifact(cfg, &name, &noise::run(cfg)?)],
        ExperimentKind::RepresentationDuel => vec![csv_artifact(cfg, &name, &duel::run(cfg)?)],
        ExperimentKind::LearnerVerification => vec![csv_artifact(cfg, &name, &verification::run(cfg)?)],
        ExperimentKind::InfectedBalls => vec![csv_artifact(cfg, &name, &infected::run(cfg)?)],
        ExperimentKind::BoundaryRaster => boundary::artifacts(cfg, &boundary::run(cfg)?),
        ExperimentKind::Fine2coarse => vec![csv_artifact(cfg, &name, &fine2coarse::run(cfg)?)],
        ExperimentKind::MajorityMc => vec![csv_artifact(cfg, &name, &majority::run(cfg)?)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_by_tag_and_parent() {
        let s = Seed(5);
        assert_ne!(derive(s, 0), derive(s, 1));
        assert_ne!(derive(s, 0), derive(Seed(4), 0));
        assert_eq!(derive(s, 3), derive(Seed(5), 3));
    }
}
