mod algorithms;
pub mod bounds;
mod hypotheses;

pub use algorithms::{
    fit_perceptron, learn_parity, learn_union_intervals, majority_vote, ParityFit, PerceptronOutcome,
    DEFAULT_PERCEPTRON_EPOCHS,
};
pub use bounds::{
    bound_infected, bound_majority, bound_minwt, bound_thm3, bound_thm3_support, BoundFormula, SampleBound,
};
pub use hypotheses::{
    Classifier, Hypothesis, LineClassifier, LinearClassifier, NearestNeighborModel, ParityHypothesis,
    ParityMode, UnionOfIntervals,
};
