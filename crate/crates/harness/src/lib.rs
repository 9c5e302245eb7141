//! Config-driven experiment runner for the noisylab primitives.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use output::{Artifact, BoundaryRaster};
