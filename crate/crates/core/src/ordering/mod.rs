//! Log-linear ordering models: scoring, exact enumeration of orderings,
//! training, interpolation and the freeness statistic.

mod compiled;
mod freeness;
mod model;
pub mod sjt;
mod train;

pub use compiled::{log_sum_exp, CompiledConfig, Enumeration, FeatureSpace, WeightedConfig};
pub use freeness::freeness;
pub use model::{ModelScorer, OrderingModel, TrainingMeta, DEFAULT_LAMBDA};
pub use sjt::{factorial, Sjt, MAX_ENUMERATION};
pub use train::{train, train_with_trace, TrainOptions, TrainingSet};

use crate::treebank::PosClass;

#[derive(Debug, thiserror::Error)]
pub enum OrderingError {
    #[error("configuration size {0} outside the supported range 1..=7")]
    FanoutOutOfRange(usize),
    #[error("cannot train on an empty set of configurations")]
    EmptyTrainingSet,
    #[error("cannot interpolate a {0} model with a {1} model")]
    ClassMismatch(PosClass, PosClass),
    #[error("interpolation weight {0} outside [0, 1]")]
    BadLambda(f64),
    #[error("freeness is undefined: no head has a dependent")]
    UndefinedFreeness,
    #[error("model file line {0}: {1}")]
    ModelFormat(usize, String),
}
