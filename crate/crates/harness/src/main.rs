use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use noisylab_harness::experiments;
use noisylab_harness::output::write_artifacts;
use noisylab_harness::{ExperimentConfig, ExperimentKind, HarnessError, Result};

#[derive(Parser)]
#[command(name = "lab", version, about = "Label-noise and adversarial-robustness experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Adversarial error against label noise on the prototype task.
    NoiseSweep(RunArgs),
    /// Perceptron against the parity rule on the ball model, scored exactly.
    RepresentationDuel(RunArgs),
    /// Union-of-intervals and parity learners on noisy interval data.
    LearnerVerification(RunArgs),
    /// 1-NN vulnerability once every support interval holds a flipped label.
    InfectedBalls(RunArgs),
    /// Decision-region rasters and blob margins of several models.
    BoundaryRaster(RunArgs),
    /// Natural, fine-label and adversarial training on the ball model.
    #[command(name = "fine2coarse")]
    Fine2coarse(RunArgs),
    /// Monte-Carlo checks of the majority-vote and occupancy bounds.
    MajorityMc(RunArgs),
    /// Parse and validate a config without running it.
    ValidateConfig(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `out`, then `out/<experiment>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; the LAB_THREADS environment variable takes precedence.
    #[arg(long)]
    threads: Option<usize>,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var("LAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| HarnessError::Config(format!("LAB_THREADS={v} is not a positive integer"))),
        Err(_) => match flag {
            Some(0) => Err(HarnessError::Config("--threads must be positive".into())),
            other => Ok(other),
        },
    }
}

fn execute(kind: Option<ExperimentKind>, args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out = Some(out);
    }
    let Some(kind) = kind else {
        println!("{}: ok ({}, config_sha256 {})", args.config.display(), cfg.experiment, cfg.hash());
        return Ok(());
    };
    if cfg.experiment != kind {
        return Err(HarnessError::Config(format!(
            "{} describes a `{}` experiment, not `{kind}`",
            args.config.display(),
            cfg.experiment
        )));
    }
    if let Some(n) = thread_count(args.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let artifacts = experiments::run(&cfg)?;
    for path in write_artifacts(&dir, &artifacts)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::NoiseSweep(a) => (Some(ExperimentKind::NoiseSweep), a),
        Command::RepresentationDuel(a) => (Some(ExperimentKind::RepresentationDuel), a),
        Command::LearnerVerification(a) => (Some(ExperimentKind::LearnerVerification), a),
        Command::InfectedBalls(a) => (Some(ExperimentKind::InfectedBalls), a),
        Command::BoundaryRaster(a) => (Some(ExperimentKind::BoundaryRaster), a),
        Command::Fine2coarse(a) => (Some(ExperimentKind::Fine2coarse), a),
        Command::MajorityMc(a) => (Some(ExperimentKind::MajorityMc), a),
        Command::ValidateConfig(a) => (None, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
