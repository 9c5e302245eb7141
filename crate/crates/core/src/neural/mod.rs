mod mlp;
mod train;

pub use mlp::{aggregate_fine_to_coarse, Aggregation, CoarseMap, CoarseNet, Differentiable, Gradients, Layer, Mlp};
pub use train::{
    fit, train_adversarial, train_natural, Architecture, EpochStats, TrainConfig, TrainOutcome,
};

pub(crate) use mlp::argmax as argmax_row;
