//! Per-configuration factor tables for fast scoring along an SJT walk.
//!
//! The feature vector of an ordering decomposes into factors:
//! ordered pairs of elements (with their region relative to the head),
//! adjacent pairs of the extended sequence, and contiguous `H` spans. A
//! [`CompiledConfig`] resolves each factor's feature names to ids once, so
//! scoring an ordering is a sum of table lookups and an adjacent swap only
//! touches the factors around the swapped positions.

use std::collections::HashMap;

use crate::features::{
    adjacency_features, element_slot, hgram_name, order_features, positional_features, HFilter,
    Region, Slot,
};
use crate::treebank::LocalConfig;

use super::sjt;

/// Interned feature names.
#[derive(Clone, Debug, Default)]
pub struct FeatureSpace {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl FeatureSpace {
    pub fn new() -> Self {
        FeatureSpace::default()
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

type Ids = Vec<u32>;

/// Factor tables of one configuration. Element indices refer to
/// `config.elements`; in the extended alphabet `n` is BOS and `n + 1` is EOS.
#[derive(Clone, Debug)]
pub struct CompiledConfig {
    n: usize,
    head: usize,
    order: Vec<Ids>,
    positional: Vec<Ids>,
    adjacent: Vec<Ids>,
    /// Packed span key to index into `hgram_ids`.
    hgram_slots: HashMap<u32, usize>,
    hgram_ids: Vec<u32>,
}

fn span_key(symbols: impl Iterator<Item = usize>) -> u32 {
    symbols.fold(0u32, |key, s| (key << 4) | (s as u32 + 1))
}

impl CompiledConfig {
    /// Resolve every factor of `config`. `resolve` returns `None` for names
    /// that can be ignored (weight 0 and not needed for expectations).
    pub fn compile(
        config: &LocalConfig,
        filter: HFilter<'_>,
        resolve: &mut dyn FnMut(&str) -> Option<u32>,
    ) -> CompiledConfig {
        let n = config.n();
        let head = config.head_position();
        let mut slots: Vec<Slot> = (0..n).map(|i| element_slot(config, i)).collect();
        slots.push(Slot::bos());
        slots.push(Slot::eos());
        let mut ids =
            |names: &[String]| -> Ids { names.iter().filter_map(|s| resolve(s)).collect() };

        let mut order = vec![Vec::new(); n * n];
        let mut positional = vec![Vec::new(); n * n * 3];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                order[a * n + b] = ids(&order_features(&slots[a], &slots[b]));
                if a != head && b != head {
                    for region in Region::ALL {
                        positional[(a * n + b) * 3 + region.index()] =
                            ids(&positional_features(region, &slots[a], &slots[b]));
                    }
                }
            }
        }
        let ext = n + 2;
        let mut adjacent = vec![Vec::new(); ext * ext];
        for x in 0..ext {
            for y in 0..ext {
                let feasible = x != y && x != n + 1 && y != n && !(x == n && y == n + 1);
                if feasible {
                    adjacent[x * ext + y] = ids(&adjacency_features(&slots[x], &slots[y]));
                }
            }
        }

        let mut compiled = CompiledConfig {
            n,
            head,
            order,
            positional,
            adjacent,
            hgram_slots: HashMap::new(),
            hgram_ids: Vec::new(),
        };
        let mut span = Vec::with_capacity(5);
        let mut used = vec![false; n];
        for len in 3..=5usize.min(n + 2) {
            compiled.collect_spans(len, &slots, &mut span, &mut used, filter, resolve);
        }
        compiled
    }

    /// Depth-first over every span of `len` extended symbols that can occur
    /// contiguously in some ordering.
    fn collect_spans(
        &mut self,
        len: usize,
        slots: &[Slot],
        span: &mut Vec<usize>,
        used: &mut [bool],
        filter: HFilter<'_>,
        resolve: &mut dyn FnMut(&str) -> Option<u32>,
    ) {
        let n = self.n;
        if span.len() == len {
            let real = span.iter().filter(|&&s| s < n).count();
            let has_bos = span[0] == n;
            let has_eos = span[len - 1] == n + 1;
            if has_bos && has_eos && real != n {
                return;
            }
            let members: Vec<Slot> = span.iter().map(|&s| slots[s].clone()).collect();
            let name = hgram_name(&members);
            if filter.allows(&name) {
                if let Some(id) = resolve(&name) {
                    self.hgram_slots
                        .insert(span_key(span.iter().copied()), self.hgram_ids.len());
                    self.hgram_ids.push(id);
                }
            }
            return;
        }
        let pos = span.len();
        let mut candidates: Vec<usize> = (0..n).filter(|&e| !used[e]).collect();
        if pos == 0 {
            candidates.push(n);
        }
        if pos == len - 1 {
            candidates.push(n + 1);
        }
        for c in candidates {
            if c < n {
                used[c] = true;
            }
            span.push(c);
            self.collect_spans(len, slots, span, used, filter, resolve);
            span.pop();
            if c < n {
                used[c] = false;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn head(&self) -> usize {
        self.head
    }

    /// Attach weights; ids at or beyond `weights.len()` weigh 0.
    pub fn weighted<'a>(&'a self, weights: &[f64]) -> WeightedConfig<'a> {
        let sum = |ids: &Ids| -> f64 {
            ids.iter()
                .map(|&id| weights.get(id as usize).copied().unwrap_or(0.0))
                .sum()
        };
        WeightedConfig {
            c: self,
            order: self.order.iter().map(sum).collect(),
            positional: self.positional.iter().map(sum).collect(),
            adjacent: self.adjacent.iter().map(sum).collect(),
            hgram: self
                .hgram_ids
                .iter()
                .map(|&id| weights.get(id as usize).copied().unwrap_or(0.0))
                .collect(),
        }
    }

    /// Feature ids (with multiplicity) fired by `perm`.
    pub fn features_of(&self, perm: &[usize]) -> Vec<u32> {
        let mut out = Vec::new();
        let n = self.n;
        let hpos = perm
            .iter()
            .position(|&e| e == self.head)
            .expect("head in perm");
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (perm[i], perm[j]);
                out.extend(&self.order[a * n + b]);
                if a != self.head && b != self.head {
                    let r = Region::of(i, j, hpos).index();
                    out.extend(&self.positional[(a * n + b) * 3 + r]);
                }
            }
        }
        let ext: Vec<usize> = extended(perm, n);
        for k in 0..=n {
            out.extend(&self.adjacent[ext[k] * (n + 2) + ext[k + 1]]);
        }
        for len in 3..=5 {
            for s in 0..ext.len().saturating_sub(len - 1) {
                if let Some(&slot) = self
                    .hgram_slots
                    .get(&span_key(ext[s..s + len].iter().copied()))
                {
                    out.push(self.hgram_ids[slot]);
                }
            }
        }
        out
    }
}

fn extended(perm: &[usize], n: usize) -> Vec<usize> {
    let mut ext = Vec::with_capacity(n + 2);
    ext.push(n);
    ext.extend_from_slice(perm);
    ext.push(n + 1);
    ext
}

/// Factor weights of one configuration under one weight vector.
#[derive(Clone, Debug)]
pub struct WeightedConfig<'a> {
    c: &'a CompiledConfig,
    order: Vec<f64>,
    positional: Vec<f64>,
    adjacent: Vec<f64>,
    hgram: Vec<f64>,
}

/// Scores of all orderings in SJT order plus the log partition function.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub scores: Vec<f64>,
    pub log_z: f64,
}

impl Enumeration {
    /// Probability of the `k`-th ordering in SJT order.
    pub fn prob(&self, k: usize) -> f64 {
        (self.scores[k] - self.log_z).exp()
    }
}

impl WeightedConfig<'_> {
    fn ext_at(&self, perm: &[usize], k: usize) -> usize {
        let n = self.c.n;
        if k == 0 {
            n
        } else if k <= n {
            perm[k - 1]
        } else {
            n + 1
        }
    }

    fn pair(&self, perm: &[usize], hpos: usize, i: usize, j: usize) -> f64 {
        let n = self.c.n;
        let (a, b) = (perm[i], perm[j]);
        let mut s = self.order[a * n + b];
        if a != self.c.head && b != self.c.head {
            s += self.positional[(a * n + b) * 3 + Region::of(i, j, hpos).index()];
        }
        s
    }

    /// Adjacency factor between extended positions `k` and `k + 1`.
    fn adjacency(&self, perm: &[usize], k: usize) -> f64 {
        let x = self.ext_at(perm, k);
        let y = self.ext_at(perm, k + 1);
        self.adjacent[x * (self.c.n + 2) + y]
    }

    fn span(&self, perm: &[usize], start: usize, len: usize) -> f64 {
        if self.hgram.is_empty() {
            return 0.0;
        }
        let key = span_key((start..start + len).map(|k| self.ext_at(perm, k)));
        self.c
            .hgram_slots
            .get(&key)
            .map_or(0.0, |&slot| self.hgram[slot])
    }

    /// `θ · f(perm)` computed from scratch.
    pub fn score(&self, perm: &[usize]) -> f64 {
        let n = self.c.n;
        let hpos = perm
            .iter()
            .position(|&e| e == self.c.head)
            .expect("head in perm");
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += self.pair(perm, hpos, i, j);
            }
        }
        for k in 0..=n {
            s += self.adjacency(perm, k);
        }
        for len in 3..=5 {
            for start in 0..(n + 2).saturating_sub(len - 1) {
                s += self.span(perm, start, len);
            }
        }
        s
    }

    /// Sum of every factor that can change when positions `p` and `p + 1` swap.
    fn local(&self, perm: &[usize], hpos: usize, p: usize) -> f64 {
        let n = self.c.n;
        let mut s = 0.0;
        for q in [p, p + 1] {
            for other in 0..n {
                if other == p || other == p + 1 {
                    continue;
                }
                s += if other < q {
                    self.pair(perm, hpos, other, q)
                } else {
                    self.pair(perm, hpos, q, other)
                };
            }
        }
        s += self.pair(perm, hpos, p, p + 1);
        // extended positions of the swapped elements are p+1 and p+2
        for k in p..=(p + 2).min(n) {
            s += self.adjacency(perm, k);
        }
        if !self.hgram.is_empty() {
            for len in 3..=5usize {
                let lo = (p + 2).saturating_sub(len);
                for start in lo..=p + 2 {
                    if start + len <= n + 2 {
                        s += self.span(perm, start, len);
                    }
                }
            }
        }
        s
    }

    /// Score change from swapping positions `p` and `p + 1` of `perm`, which
    /// is updated in place along with the head position.
    pub fn swap_delta(&self, perm: &mut [usize], hpos: &mut usize, p: usize) -> f64 {
        let before = self.local(perm, *hpos, p);
        perm.swap(p, p + 1);
        if *hpos == p {
            *hpos = p + 1;
        } else if *hpos == p + 1 {
            *hpos = p;
        }
        self.local(perm, *hpos, p) - before
    }

    /// Scores of every ordering in SJT order, maintained incrementally.
    pub fn enumerate(&self) -> Enumeration {
        let n = self.c.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut hpos = self.c.head;
        let mut current = self.score(&perm);
        let mut scores = Vec::with_capacity(sjt::factorial(n) as usize);
        sjt::walk(n, |_, swap| {
            if let Some(p) = swap {
                current += self.swap_delta(&mut perm, &mut hpos, p);
            }
            scores.push(current);
        });
        let log_z = log_sum_exp(&scores);
        Enumeration { scores, log_z }
    }

    /// Expected feature counts `Σ_π p(π) f(π)` as `(id, value)` pairs.
    pub fn expectation(&self, en: &Enumeration) -> Vec<(u32, f64)> {
        let c = self.c;
        let n = c.n;
        let ext_n = n + 2;
        let mut order_m = vec![0.0; n * n];
        let mut pos_m = vec![0.0; n * n * 3];
        let mut adj_m = vec![0.0; ext_n * ext_n];
        let mut h_m = vec![0.0; c.hgram_ids.len()];
        let mut k = 0;
        sjt::walk(n, |perm, _| {
            let q = en.prob(k);
            k += 1;
            let hpos = perm.iter().position(|&e| e == c.head).unwrap();
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (perm[i], perm[j]);
                    order_m[a * n + b] += q;
                    if a != c.head && b != c.head {
                        pos_m[(a * n + b) * 3 + Region::of(i, j, hpos).index()] += q;
                    }
                }
            }
            for kk in 0..=n {
                adj_m[self.ext_at(perm, kk) * ext_n + self.ext_at(perm, kk + 1)] += q;
            }
            if !h_m.is_empty() {
                for len in 3..=5 {
                    for start in 0..ext_n.saturating_sub(len - 1) {
                        let key = span_key((start..start + len).map(|p| self.ext_at(perm, p)));
                        if let Some(&slot) = c.hgram_slots.get(&key) {
                            h_m[slot] += q;
                        }
                    }
                }
            }
        });
        let mut acc: HashMap<u32, f64> = HashMap::new();
        let mut add = |ids: &Ids, m: f64| {
            if m != 0.0 {
                for &id in ids {
                    *acc.entry(id).or_insert(0.0) += m;
                }
            }
        };
        for (ids, &m) in c.order.iter().zip(&order_m) {
            add(ids, m);
        }
        for (ids, &m) in c.positional.iter().zip(&pos_m) {
            add(ids, m);
        }
        for (ids, &m) in c.adjacent.iter().zip(&adj_m) {
            add(ids, m);
        }
        for (&id, &m) in c.hgram_ids.iter().zip(&h_m) {
            if m != 0.0 {
                *acc.entry(id).or_insert(0.0) += m;
            }
        }
        let mut out: Vec<(u32, f64)> = acc.into_iter().collect();
        out.sort_unstable_by_key(|&(id, _)| id);
        out
    }
}

/// `log Σ exp(x)` with max subtraction.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
