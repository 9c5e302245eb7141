//! Samplers, learners, small neural networks and risk evaluators for
//! studying how fitting label noise interacts with adversarial risk.

pub mod data;
pub mod distributions;
pub mod error;
pub mod gf2;
pub mod interval;
pub mod learners;
pub mod mnist;
pub mod neural;
pub mod risk;

pub use data::{Dataset, Point, Sample, Seed, TrainView};
pub use error::{LabError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
