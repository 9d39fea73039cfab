use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, RwLock};

use crate::features::{extract, FeatureVector, HFilter};
use crate::treebank::{LocalConfig, PosClass};

use super::compiled::{CompiledConfig, Enumeration, FeatureSpace};
use super::sjt::MAX_ENUMERATION;
use super::OrderingError;

/// Default interpolation weight of the substrate model.
pub const DEFAULT_LAMBDA: f64 = 0.05;

/// Convergence record of a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingMeta {
    pub iterations: usize,
    /// Mean log-likelihood per training configuration at the returned weights.
    pub objective: f64,
    /// Infinity norm of the mean gradient at the returned weights.
    pub gradient_norm: f64,
    pub converged: bool,
}

/// Log-linear ordering model for one (language, POS class) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderingModel {
    pub language: String,
    pub pos_class: PosClass,
    /// Feature weights; absent names weigh 0.
    pub weights: BTreeMap<String, f64>,
    pub h_whitelist: BTreeSet<String>,
    pub training_meta: TrainingMeta,
}

impl OrderingModel {
    /// The uniform model.
    pub fn zero(language: &str, pos_class: PosClass) -> Self {
        OrderingModel {
            language: language.to_string(),
            pos_class,
            weights: BTreeMap::new(),
            h_whitelist: BTreeSet::new(),
            training_meta: TrainingMeta::default(),
        }
    }

    pub fn with_weights<'a>(
        language: &str,
        pos_class: PosClass,
        weights: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Self {
        let mut m = OrderingModel::zero(language, pos_class);
        for (name, w) in weights {
            m.weights.insert(name.to_string(), w);
            if name.starts_with("H.") {
                m.h_whitelist.insert(name.to_string());
            }
        }
        m
    }

    pub fn weight(&self, name: &str) -> f64 {
        self.weights.get(name).copied().unwrap_or(0.0)
    }

    pub fn filter(&self) -> HFilter<'_> {
        HFilter::Only(&self.h_whitelist)
    }

    /// Unnormalized log-probability `θ · f(π)`, by direct feature extraction.
    pub fn score(&self, config: &LocalConfig, perm: &[usize]) -> f64 {
        extract(config, perm, self.filter()).dot(&self.weights)
    }

    /// Precomputed lookup tables for repeated scoring.
    pub fn scorer(&self) -> ModelScorer<'_> {
        let mut space = FeatureSpace::new();
        let mut weights = Vec::with_capacity(self.weights.len());
        for (name, &w) in &self.weights {
            if w != 0.0 {
                space.intern(name);
                weights.push(w);
            }
        }
        ModelScorer {
            model: self,
            space,
            weights,
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// `log Z(x)` and the expected feature vector under the model.
    pub fn log_partition_and_expectation(
        &self,
        config: &LocalConfig,
    ) -> Result<(f64, FeatureVector), OrderingError> {
        check_n(config.n())?;
        let mut space = FeatureSpace::new();
        let compiled =
            CompiledConfig::compile(config, self.filter(), &mut |s| Some(space.intern(s)));
        let weights: Vec<f64> = (0..space.len() as u32)
            .map(|id| self.weight(space.name(id)))
            .collect();
        let weighted = compiled.weighted(&weights);
        let en = weighted.enumerate();
        let mut fv = FeatureVector::new();
        for (id, v) in weighted.expectation(&en) {
            fv.add(space.name(id).to_string(), v);
        }
        Ok((en.log_z, fv))
    }

    /// `(1 − λ)·superstrate + λ·substrate`, with the union of both whitelists.
    pub fn interpolate(
        superstrate: &OrderingModel,
        substrate: &OrderingModel,
        lambda: f64,
    ) -> Result<OrderingModel, OrderingError> {
        if superstrate.pos_class != substrate.pos_class {
            return Err(OrderingError::ClassMismatch(
                superstrate.pos_class,
                substrate.pos_class,
            ));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(OrderingError::BadLambda(lambda));
        }
        let mut weights = BTreeMap::new();
        let names: BTreeSet<&String> = superstrate
            .weights
            .keys()
            .chain(substrate.weights.keys())
            .collect();
        for name in names {
            let w = (1.0 - lambda) * superstrate.weight(name) + lambda * substrate.weight(name);
            weights.insert(name.clone(), w);
        }
        Ok(OrderingModel {
            language: format!("{}+{}", superstrate.language, substrate.language),
            pos_class: superstrate.pos_class,
            weights,
            h_whitelist: superstrate
                .h_whitelist
                .union(&substrate.h_whitelist)
                .cloned()
                .collect(),
            training_meta: TrainingMeta::default(),
        })
    }

    /// Line-oriented text form: `#`-headers, then `name\tweight` sorted by name.
    /// Whitelisted `H` names appear even at weight 0.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#lang {}", self.language);
        let _ = writeln!(out, "#pos {}", self.pos_class);
        let _ = writeln!(out, "#version 1");
        let m = &self.training_meta;
        let _ = writeln!(
            out,
            "#meta iterations={} objective={} gradient_norm={} converged={}",
            m.iterations, m.objective, m.gradient_norm, m.converged
        );
        let mut lines: BTreeMap<&str, f64> = self
            .weights
            .iter()
            .filter(|(name, &w)| w != 0.0 || self.h_whitelist.contains(*name))
            .map(|(k, &v)| (k.as_str(), v))
            .collect();
        for name in &self.h_whitelist {
            lines.entry(name.as_str()).or_insert(0.0);
        }
        for (name, w) in lines {
            let _ = writeln!(out, "{name}\t{w:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<OrderingModel, OrderingError> {
        let mut language = None;
        let mut pos_class = None;
        let mut version = None;
        let mut meta = TrainingMeta::default();
        let mut weights = BTreeMap::new();
        let mut h_whitelist = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let bad = |what: &str| OrderingError::ModelFormat(i + 1, what.to_string());
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let (key, value) = header.split_once(' ').unwrap_or((header, ""));
                match key {
                    "lang" => language = Some(value.to_string()),
                    "pos" => pos_class = Some(value.parse().map_err(|e: String| bad(&e))?),
                    "version" => version = Some(value.to_string()),
                    "meta" => meta = parse_meta(value).ok_or_else(|| bad("malformed #meta"))?,
                    _ => {}
                }
                continue;
            }
            let (name, w) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected name\\tweight"))?;
            let w: f64 = w.parse().map_err(|_| bad("weight is not a number"))?;
            if name.starts_with("H.") {
                h_whitelist.insert(name.to_string());
            }
            if w != 0.0 {
                weights.insert(name.to_string(), w);
            }
        }
        if version.as_deref() != Some("1") {
            return Err(OrderingError::ModelFormat(
                0,
                "missing or unsupported #version".into(),
            ));
        }
        Ok(OrderingModel {
            language: language
                .ok_or_else(|| OrderingError::ModelFormat(0, "missing #lang".into()))?,
            pos_class: pos_class
                .ok_or_else(|| OrderingError::ModelFormat(0, "missing #pos".into()))?,
            weights,
            h_whitelist,
            training_meta: meta,
        })
    }
}

fn parse_meta(value: &str) -> Option<TrainingMeta> {
    let mut meta = TrainingMeta::default();
    for item in value.split_whitespace() {
        let (k, v) = item.split_once('=')?;
        match k {
            "iterations" => meta.iterations = v.parse().ok()?,
            "objective" => meta.objective = v.parse().ok()?,
            "gradient_norm" => meta.gradient_norm = v.parse().ok()?,
            "converged" => meta.converged = v.parse().ok()?,
            _ => {}
        }
    }
    Some(meta)
}

pub(crate) fn check_n(n: usize) -> Result<(), OrderingError> {
    if n == 0 || n > MAX_ENUMERATION {
        Err(OrderingError::FanoutOutOfRange(n))
    } else {
        Ok(())
    }
}

/// Cached enumerations are kept for configurations up to this size.
const CACHE_MAX_N: usize = 6;
const CACHE_CAPACITY: usize = 1 << 14;

type LabelKey = Vec<(String, String)>;

/// A model with its nonzero weights interned for table-driven scoring.
#[derive(Debug)]
pub struct ModelScorer<'m> {
    model: &'m OrderingModel,
    space: FeatureSpace,
    weights: Vec<f64>,
    cache: RwLock<HashMap<LabelKey, Arc<Enumeration>>>,
}

impl Clone for ModelScorer<'_> {
    fn clone(&self) -> Self {
        ModelScorer {
            model: self.model,
            space: self.space.clone(),
            weights: self.weights.clone(),
            cache: RwLock::new(HashMap::new()),
        }
    }
}

impl ModelScorer<'_> {
    pub fn model(&self) -> &OrderingModel {
        self.model
    }

    pub fn compile(&self, config: &LocalConfig) -> CompiledConfig {
        CompiledConfig::compile(config, self.model.filter(), &mut |s| self.space.get(s))
    }

    /// Scores of every ordering of `config`, in SJT order.
    pub fn enumerate(&self, config: &LocalConfig) -> Result<Enumeration, OrderingError> {
        check_n(config.n())?;
        let compiled = self.compile(config);
        Ok(compiled.weighted(&self.weights).enumerate())
    }

    /// Like [`enumerate`](Self::enumerate), memoized on the label sequence.
    /// Configurations with equal labels have identical distributions.
    pub fn enumerate_cached(
        &self,
        config: &LocalConfig,
    ) -> Result<Arc<Enumeration>, OrderingError> {
        if config.n() > CACHE_MAX_N {
            return self.enumerate(config).map(Arc::new);
        }
        let key: LabelKey = config
            .elements
            .iter()
            .map(|e| (e.tag.clone(), e.relation.clone()))
            .collect();
        if let Some(en) = self.cache.read().unwrap().get(&key) {
            return Ok(Arc::clone(en));
        }
        let en = Arc::new(self.enumerate(config)?);
        let mut cache = self.cache.write().unwrap();
        if cache.len() < CACHE_CAPACITY {
            cache.insert(key, Arc::clone(&en));
        }
        Ok(en)
    }

    /// `log p(π | x)`.
    pub fn log_prob(&self, config: &LocalConfig, perm: &[usize]) -> Result<f64, OrderingError> {
        check_n(config.n())?;
        let compiled = self.compile(config);
        let weighted = compiled.weighted(&self.weights);
        let en = weighted.enumerate();
        Ok(weighted.score(perm) - en.log_z)
    }

    /// `log p` of the observed (surface) order.
    pub fn log_prob_observed(&self, config: &LocalConfig) -> Result<f64, OrderingError> {
        check_n(config.n())?;
        // the SJT walk starts at the identity
        let en = self.enumerate_cached(config)?;
        Ok(en.scores[0] - en.log_z)
    }
}
