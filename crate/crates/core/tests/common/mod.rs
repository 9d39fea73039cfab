#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use galactic::features::{extract, HFilter};
use galactic::ordering::OrderingModel;
use galactic::treebank::{parse_conllu, DepTree, LabelMode, LocalConfig, PosClass, Token};
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn treebank_dir(lang: &str) -> PathBuf {
    fixtures().join("treebanks").join(lang)
}

pub fn load(lang: &str, split: &str) -> Vec<DepTree> {
    let path = treebank_dir(lang).join(format!("{lang}-ud-{split}.conllu"));
    parse_conllu(&fs::read_to_string(path).unwrap(), LabelMode::Strict).unwrap()
}

pub fn every_move() -> DepTree {
    let text = fs::read_to_string(fixtures().join("every_move.conllu")).unwrap();
    parse_conllu(&text, LabelMode::Strict).unwrap().remove(0)
}

pub fn worked_subtree() -> LocalConfig {
    LocalConfig::from_pairs(&[("DET", "det"), ("ADJ", "amod"), ("NOUN", "head")])
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

const DEP_LABELS: [(&str, &str); 8] = [
    ("DET", "det"),
    ("ADJ", "amod"),
    ("NOUN", "nsubj"),
    ("NOUN", "dobj"),
    ("ADV", "advmod"),
    ("PUNCT", "punct"),
    ("ADP", "case"),
    ("PRON", "nmod"),
];

/// A configuration with `n` elements drawn from a small label pool, so
/// repeated dependents occur.
pub fn random_config(rng: &mut impl Rng, n: usize) -> LocalConfig {
    let head = *["NOUN", "VERB", "PRON"].choose(rng).unwrap();
    let mut pairs: Vec<(&str, &str)> = (1..n).map(|_| *DEP_LABELS.choose(rng).unwrap()).collect();
    let at = rng.gen_range(0..n);
    pairs.insert(at, (head, "head"));
    LocalConfig::from_pairs(&pairs)
}

/// Random weights on about 70% of the features any ordering of `config`
/// can fire; H features that receive a weight are whitelisted.
pub fn random_model(rng: &mut impl Rng, config: &LocalConfig, scale: f64) -> OrderingModel {
    let mut names = std::collections::BTreeSet::new();
    for perm in permutations(config.n()) {
        for (name, _) in extract(config, &perm, HFilter::All).iter() {
            names.insert(name.clone());
        }
    }
    let mut weights: Vec<(String, f64)> = Vec::new();
    for name in names {
        if rng.gen_bool(0.7) {
            weights.push((name, rng.gen_range(-scale..scale)));
        }
    }
    OrderingModel::with_weights(
        "rand",
        PosClass::N,
        weights.iter().map(|(n, w)| (n.as_str(), *w)),
    )
}

/// `log Σ_π exp(θ·f(π))` by explicit re-extraction of every ordering.
pub fn brute_log_z(model: &OrderingModel, config: &LocalConfig) -> f64 {
    let scores: Vec<f64> = permutations(config.n())
        .iter()
        .map(|p| model.score(config, p))
        .collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

/// Exact distribution over orderings keyed by permutation.
pub fn brute_distribution(
    model: &OrderingModel,
    config: &LocalConfig,
) -> BTreeMap<Vec<usize>, f64> {
    let log_z = brute_log_z(model, config);
    permutations(config.n())
        .into_iter()
        .map(|p| {
            let pr = (model.score(config, &p) - log_z).exp();
            (p, pr)
        })
        .collect()
}

/// A random valid tree with `len` tokens.
pub fn random_tree(rng: &mut impl Rng, len: usize) -> DepTree {
    const TAGS: [&str; 6] = ["NOUN", "VERB", "DET", "ADJ", "PRON", "ADV"];
    const RELS: [&str; 6] = ["nsubj", "dobj", "det", "amod", "advmod", "acl:relcl"];
    let mut order: Vec<usize> = (1..=len).collect();
    order.shuffle(rng);
    let mut heads = vec![0usize; len + 1];
    for k in 1..len {
        heads[order[k]] = order[rng.gen_range(0..k)];
    }
    let tokens = (1..=len)
        .map(|i| {
            let rel = if heads[i] == 0 {
                "root"
            } else {
                RELS.choose(rng).unwrap()
            };
            let form: String = (0..rng.gen_range(1..6))
                .map(|_| rng.gen_range(b'a'..=b'z') as char)
                .collect();
            let mut t = Token::new(i, &form, TAGS.choose(rng).unwrap(), heads[i], rel);
            if rng.gen_bool(0.3) {
                t.misc = format!("SpaceAfter=No|OrigIdx={}", rng.gen_range(1..20));
            }
            t
        })
        .collect();
    let mut tree = DepTree::new(tokens);
    tree.comments = vec![
        format!("# sent_id = r{len}"),
        "# text = generated".to_string(),
    ];
    tree.source_id = format!("r{len}");
    tree
}

/// p-value of the Pearson statistic, with cells of expected count < 5 pooled.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        if e < 5.0 {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}
