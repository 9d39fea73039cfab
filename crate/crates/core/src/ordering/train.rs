//! Maximum-likelihood training of ordering models.
//!
//! The objective is the mean log-probability of the observed orders, which is
//! concave in the weights. It is maximized with L-BFGS directions and a
//! backtracking (Armijo) line search, so every accepted step increases it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::features::{element_slot, HFilter, Slot};
use crate::treebank::{LocalConfig, PosClass};

use super::compiled::{CompiledConfig, FeatureSpace};
use super::model::{check_n, OrderingModel, TrainingMeta};
use super::OrderingError;

#[derive(Clone, Debug)]
pub struct TrainOptions {
    pub max_iterations: usize,
    /// Stop when the infinity norm of the mean gradient falls to this value.
    pub tolerance: f64,
    /// Number of correction pairs kept by L-BFGS.
    pub memory: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            max_iterations: 200,
            tolerance: 1e-5,
            memory: 10,
        }
    }
}

/// Distinct observed configurations with their multiplicities, compiled
/// against a shared feature space.
pub struct TrainingSet {
    space: FeatureSpace,
    compiled: Vec<CompiledConfig>,
    observed: Vec<Vec<u32>>,
    counts: Vec<f64>,
    total: f64,
}

impl TrainingSet {
    pub fn new(
        configs: &[LocalConfig],
        whitelist: &BTreeSet<String>,
    ) -> Result<Self, OrderingError> {
        if configs.is_empty() {
            return Err(OrderingError::EmptyTrainingSet);
        }
        let mut index: HashMap<Vec<Slot>, usize> = HashMap::new();
        let mut distinct: Vec<&LocalConfig> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for config in configs {
            check_n(config.n())?;
            let key: Vec<Slot> = (0..config.n()).map(|i| element_slot(config, i)).collect();
            match index.get(&key) {
                Some(&k) => counts[k] += 1.0,
                None => {
                    index.insert(key, distinct.len());
                    distinct.push(config);
                    counts.push(1.0);
                }
            }
        }
        let mut space = FeatureSpace::new();
        let filter = HFilter::Only(whitelist);
        let compiled: Vec<CompiledConfig> = distinct
            .iter()
            .map(|c| CompiledConfig::compile(c, filter, &mut |s| Some(space.intern(s))))
            .collect();
        let observed = compiled
            .iter()
            .map(|c| c.features_of(&(0..c.n()).collect::<Vec<_>>()))
            .collect();
        Ok(TrainingSet {
            space,
            compiled,
            observed,
            counts,
            total: configs.len() as f64,
        })
    }

    pub fn num_features(&self) -> usize {
        self.space.len()
    }

    pub fn num_distinct(&self) -> usize {
        self.compiled.len()
    }

    pub fn feature_name(&self, id: u32) -> &str {
        self.space.name(id)
    }

    /// Mean log-likelihood and its gradient at `theta`.
    pub fn objective(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let per_config: Vec<(f64, Vec<(u32, f64)>)> = self
            .compiled
            .par_iter()
            .map(|c| {
                let w = c.weighted(theta);
                let en = w.enumerate();
                (en.scores[0] - en.log_z, w.expectation(&en))
            })
            .collect();
        let mut value = 0.0;
        let mut grad = vec![0.0; theta.len()];
        for (k, (ll, expected)) in per_config.iter().enumerate() {
            let count = self.counts[k];
            value += count * ll;
            for &id in &self.observed[k] {
                grad[id as usize] += count;
            }
            for &(id, e) in expected {
                grad[id as usize] -= count * e;
            }
        }
        let scale = 1.0 / self.total;
        grad.iter_mut().for_each(|g| *g *= scale);
        (value * scale, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Train a model on observed configurations; `objective trace` lists the
/// objective after every accepted step, starting at the zero vector.
pub fn train_with_trace(
    language: &str,
    pos_class: PosClass,
    configs: &[LocalConfig],
    whitelist: &BTreeSet<String>,
    options: &TrainOptions,
) -> Result<(OrderingModel, Vec<f64>), OrderingError> {
    let set = TrainingSet::new(configs, whitelist)?;
    let dim = set.num_features();
    let mut theta = vec![0.0; dim];
    let (mut value, mut grad) = set.objective(&theta);
    let mut trace = vec![value];
    let mut history: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut iterations = 0;
    let mut converged = inf_norm(&grad) <= options.tolerance;

    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let mut direction = lbfgs_direction(&grad, &history);
        if dot(&direction, &grad) <= 0.0 {
            history.clear();
            direction = grad.clone();
        }
        let mut step = if history.is_empty() {
            1.0 / inf_norm(&grad).max(1.0)
        } else {
            1.0
        };
        let slope = dot(&direction, &grad);
        let mut accepted = None;
        for _ in 0..50 {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(&direction)
                .map(|(t, d)| t + step * d)
                .collect();
            let (v, g) = set.objective(&candidate);
            if v.is_finite() && v >= value + 1e-4 * step * slope {
                accepted = Some((candidate, v, g));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_value, next_grad)) = accepted else {
            if history.is_empty() {
                log::warn!("line search failed along the gradient; stopping");
                break;
            }
            history.clear();
            continue;
        };
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        // curvature pair for the minimization of -f
        let y: Vec<f64> = grad.iter().zip(&next_grad).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-12 {
            history.push((s, y));
            if history.len() > options.memory {
                history.remove(0);
            }
        }
        theta = next;
        value = next_value;
        grad = next_grad;
        trace.push(value);
        converged = inf_norm(&grad) <= options.tolerance;
    }
    if !converged {
        log::warn!(
            "{language}/{pos_class}: no convergence after {iterations} iterations (gradient {:.3e})",
            inf_norm(&grad)
        );
    }

    let weights: BTreeMap<String, f64> = theta
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(id, &w)| (set.feature_name(id as u32).to_string(), w))
        .collect();
    let model = OrderingModel {
        language: language.to_string(),
        pos_class,
        weights,
        h_whitelist: whitelist.clone(),
        training_meta: TrainingMeta {
            iterations,
            objective: value,
            gradient_norm: inf_norm(&grad),
            converged,
        },
    };
    Ok((model, trace))
}

/// Train a model on observed configurations.
pub fn train(
    language: &str,
    pos_class: PosClass,
    configs: &[LocalConfig],
    whitelist: &BTreeSet<String>,
    options: &TrainOptions,
) -> Result<OrderingModel, OrderingError> {
    train_with_trace(language, pos_class, configs, whitelist, options).map(|(m, _)| m)
}

/// Ascent direction `H·g` from the two-loop recursion.
fn lbfgs_direction(grad: &[f64], history: &[(Vec<f64>, Vec<f64>)]) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y) in history.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push((a, rho));
    }
    if let Some((s, y)) = history.last() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y), (a, rho)) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q
}
