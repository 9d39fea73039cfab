use crate::treebank::{local_configs, DepTree, PosClass};

use super::model::OrderingModel;
use super::sjt::factorial;
use super::OrderingError;

/// Cross-entropy of the models on observed orders relative to the uniform
/// distribution, over all N and V heads of `trees`. Near 0 means rigid order,
/// near 1 free order.
pub fn freeness(
    model_n: &OrderingModel,
    model_v: &OrderingModel,
    trees: &[DepTree],
) -> Result<f64, OrderingError> {
    let scorers = [model_n.scorer(), model_v.scorer()];
    let mut model_nats = 0.0;
    let mut uniform_nats = 0.0;
    for tree in trees {
        for (class, scorer) in PosClass::ALL.into_iter().zip(&scorers) {
            for config in local_configs(tree, class) {
                if config.n() < 2 {
                    continue;
                }
                model_nats -= scorer.log_prob_observed(&config)?;
                uniform_nats += (factorial(config.n()) as f64).ln();
            }
        }
    }
    if uniform_nats == 0.0 {
        return Err(OrderingError::UndefinedFreeness);
    }
    Ok(model_nats / uniform_nats)
}
