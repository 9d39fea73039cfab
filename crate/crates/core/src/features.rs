//! Feature templates for the ordering model.
//!
//! An ordering of a head and its dependents is scored through features of
//! ordered pairs of slots in the *extended sequence* `BOS, π_1, …, π_n, EOS`.
//! Five template families fire:
//!
//! * head direction `L.t.r` (a dependent left of the head),
//! * sibling order `L.t1.r1.t2.r2`,
//! * positional order `d.t1.r1.t2.r2` with `d` in `l`/`m`/`r` relative to the head,
//! * adjacency `A.t1.r1.t2.r2`, sentinels included,
//! * `H.` k-grams over 3 to 5 contiguous slots, filtered by a whitelist.
//!
//! Every non-`H` template also fires its tags-only and relations-only backoffs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::treebank::labels::universal_relation;
use crate::treebank::{LocalConfig, HEAD_RELATION};

pub const BOS: &str = "BOS";
pub const EOS: &str = "EOS";

/// Fraction of distinct `H` features kept by [`build_h_whitelist`].
pub const H_WHITELIST_FRACTION: f64 = 0.10;

/// Tag and relation of one slot. Relations are reduced to their universal prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub tag: String,
    pub rel: String,
}

impl Slot {
    pub fn new(tag: &str, rel: &str) -> Self {
        Slot {
            tag: tag.to_string(),
            rel: rel.to_string(),
        }
    }

    pub fn bos() -> Self {
        Slot::new(BOS, BOS)
    }

    pub fn eos() -> Self {
        Slot::new(EOS, EOS)
    }

    pub fn is_head(&self) -> bool {
        self.rel == HEAD_RELATION
    }
}

/// `BOS`, the permuted elements, `EOS`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedSequence {
    pub slots: Vec<Slot>,
    /// Slot index of the head.
    pub head: usize,
}

impl ExtendedSequence {
    /// Place `config.elements[perm[k]]` at slot `k + 1`.
    pub fn new(config: &LocalConfig, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), config.n(), "permutation length mismatch");
        let mut slots = Vec::with_capacity(perm.len() + 2);
        slots.push(Slot::bos());
        slots.extend(perm.iter().map(|&i| element_slot(config, i)));
        slots.push(Slot::eos());
        let head = slots
            .iter()
            .position(Slot::is_head)
            .expect("configuration has a head element");
        ExtendedSequence { slots, head }
    }

    /// Number of real elements.
    pub fn n(&self) -> usize {
        self.slots.len() - 2
    }
}

/// Slot for element `i` of a configuration.
pub fn element_slot(config: &LocalConfig, i: usize) -> Slot {
    let e = &config.elements[i];
    Slot::new(&e.tag, universal_relation(&e.relation))
}

/// Region of a non-head pair relative to the head.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Left,
    Middle,
    Right,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Left, Region::Middle, Region::Right];

    pub fn of(i: usize, j: usize, head: usize) -> Region {
        debug_assert!(i < j && i != head && j != head);
        if j < head {
            Region::Left
        } else if i < head {
            Region::Middle
        } else {
            Region::Right
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Region::Left => "l",
            Region::Middle => "m",
            Region::Right => "r",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

fn pair_triple(prefix: &str, a: &Slot, b: &Slot) -> [String; 3] {
    [
        format!("{prefix}.{}.{}.{}.{}", a.tag, a.rel, b.tag, b.rel),
        format!("{prefix}.{}.{}", a.tag, b.tag),
        format!("{prefix}.{}.{}", a.rel, b.rel),
    ]
}

/// Features fired because `a` precedes `b` (both real elements), ignoring position.
pub fn order_features(a: &Slot, b: &Slot) -> Vec<String> {
    match (a.is_head(), b.is_head()) {
        (false, true) => vec![
            format!("L.{}.{}", a.tag, a.rel),
            format!("L.{}", a.tag),
            format!("L.{}", a.rel),
        ],
        (false, false) => pair_triple("L", a, b).to_vec(),
        _ => Vec::new(),
    }
}

/// Features fired because non-head `a` precedes non-head `b` in `region`.
pub fn positional_features(region: Region, a: &Slot, b: &Slot) -> [String; 3] {
    pair_triple(region.prefix(), a, b)
}

/// Features fired because `b` immediately follows `a`.
pub fn adjacency_features(a: &Slot, b: &Slot) -> [String; 3] {
    pair_triple("A", a, b)
}

/// The single `H` name for a run of contiguous slots.
pub fn hgram_name(slots: &[Slot]) -> String {
    let mut name = String::from("H");
    for s in slots {
        name.push('.');
        name.push_str(&s.tag);
        name.push('.');
        name.push_str(&s.rel);
    }
    name
}

/// All non-`H` features fired by the slot pair `(i, j)`, `i < j`.
pub fn pair_features(seq: &ExtendedSequence, i: usize, j: usize) -> Vec<String> {
    assert!(i < j && j < seq.slots.len(), "slot pair out of range");
    let last = seq.slots.len() - 1;
    let (a, b) = (&seq.slots[i], &seq.slots[j]);
    let mut out = Vec::new();
    let both_real = i >= 1 && j < last;
    if both_real {
        out.extend(order_features(a, b));
        if i != seq.head && j != seq.head {
            out.extend(positional_features(Region::of(i, j, seq.head), a, b));
        }
    }
    if j == i + 1 {
        out.extend(adjacency_features(a, b));
    }
    out
}

/// The `H` feature over slots `i..=j`, when the span holds 3 to 5 slots.
pub fn hgram_features(seq: &ExtendedSequence, i: usize, j: usize) -> Vec<String> {
    if i + 2 <= j && j <= i + 4 && j < seq.slots.len() {
        vec![hgram_name(&seq.slots[i..=j])]
    } else {
        Vec::new()
    }
}

/// Which `H` features may fire.
#[derive(Clone, Copy, Debug)]
pub enum HFilter<'a> {
    All,
    Only(&'a BTreeSet<String>),
}

impl HFilter<'_> {
    pub fn allows(&self, name: &str) -> bool {
        match self {
            HFilter::All => true,
            HFilter::Only(set) => set.contains(name),
        }
    }
}

/// Sparse feature counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector(pub BTreeMap<String, f64>);

impl FeatureVector {
    pub fn new() -> Self {
        FeatureVector::default()
    }

    pub fn add(&mut self, name: String, value: f64) {
        *self.0.entry(name).or_insert(0.0) += value;
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.0.iter()
    }

    /// `Σ weights[name] · count`; names without a weight contribute 0.
    pub fn dot(&self, weights: &BTreeMap<String, f64>) -> f64 {
        self.0
            .iter()
            .filter_map(|(k, v)| weights.get(k).map(|w| w * v))
            .sum()
    }
}

/// Feature vector of `config` under the ordering `perm`.
pub fn extract(config: &LocalConfig, perm: &[usize], filter: HFilter<'_>) -> FeatureVector {
    extract_sequence(&ExtendedSequence::new(config, perm), filter)
}

pub fn extract_sequence(seq: &ExtendedSequence, filter: HFilter<'_>) -> FeatureVector {
    let mut fv = FeatureVector::new();
    let len = seq.slots.len();
    for i in 0..len {
        for j in i + 1..len {
            for name in pair_features(seq, i, j) {
                fv.add(name, 1.0);
            }
            for name in hgram_features(seq, i, j) {
                if filter.allows(&name) {
                    fv.add(name, 1.0);
                }
            }
        }
    }
    fv
}

/// Keep the most frequent 10% of distinct `H` features fired by the observed
/// orders; ties at the cutoff go to the lexicographically smaller name.
pub fn build_h_whitelist(configs: &[LocalConfig]) -> BTreeSet<String> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for config in configs {
        let identity: Vec<usize> = (0..config.n()).collect();
        let seq = ExtendedSequence::new(config, &identity);
        let len = seq.slots.len();
        for i in 0..len {
            for j in i + 2..len.min(i + 5) {
                *counts.entry(hgram_name(&seq.slots[i..=j])).or_insert(0) += 1;
            }
        }
    }
    top_fraction(counts, H_WHITELIST_FRACTION)
}

/// The `ceil(fraction · |counts|)` names with the highest counts.
pub fn top_fraction(counts: HashMap<String, u64>, fraction: f64) -> BTreeSet<String> {
    let keep = (fraction * counts.len() as f64).ceil() as usize;
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(keep)
        .map(|(name, _)| name)
        .collect()
}
