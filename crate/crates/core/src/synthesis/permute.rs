use crate::ordering::{ModelScorer, OrderingError, Sjt};
use crate::treebank::{generation_defect, local_config_at, DepTree, LocalConfig, PosClass};

use super::rng::RngStream;
use super::SynthesisError;

/// MISC key recording a token's position in the substrate sentence.
pub const ORIG_IDX: &str = "OrigIdx";

/// Draw an ordering of `config` exactly from the model by inverting the CDF
/// accumulated in SJT order. A lone head consumes no draw.
pub fn sample_ordering(
    scorer: &ModelScorer<'_>,
    config: &LocalConfig,
    rng: &mut RngStream,
) -> Result<Vec<usize>, OrderingError> {
    let n = config.n();
    if n == 1 {
        return Ok(vec![0]);
    }
    let en = scorer.enumerate_cached(config)?;
    let u = rng.uniform();
    let mut cumulative = 0.0;
    let mut chosen = en.scores.len() - 1;
    for k in 0..en.scores.len() {
        cumulative += en.prob(k);
        if cumulative >= u {
            chosen = k;
            break;
        }
    }
    Ok(nth_sjt_permutation(n, chosen))
}

fn nth_sjt_permutation(n: usize, k: usize) -> Vec<usize> {
    let mut it = Sjt::new(n).expect("n checked by the scorer");
    it.nth(k).map(|(perm, _)| perm).expect("k below n!")
}

/// Line-level side effects of permuting one tree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PermuteNotes {
    pub multiword_dropped: usize,
    pub other_lines_dropped: usize,
    pub deps_cleared: usize,
}

impl PermuteNotes {
    pub fn absorb(&mut self, other: &PermuteNotes) {
        self.multiword_dropped += other.multiword_dropped;
        self.other_lines_dropped += other.other_lines_dropped;
        self.deps_cleared += other.deps_cleared;
    }
}

/// Reorder the dependents of every N head with `model_n` and every VERB head
/// with `model_v`; heads without a model keep their order.
///
/// Heads are visited depth-first from the root, children in original surface
/// order, which fixes the order of random draws.
pub fn permute_tree(
    tree: &DepTree,
    model_n: Option<&ModelScorer<'_>>,
    model_v: Option<&ModelScorer<'_>>,
    rng: &mut RngStream,
) -> Result<(DepTree, PermuteNotes), SynthesisError> {
    if let Some(reason) = generation_defect(tree) {
        return Err(SynthesisError::Unfiltered(tree.source_id.clone(), reason));
    }
    let children = tree.children();
    let mut order: Vec<Vec<usize>> = vec![Vec::new(); tree.len() + 1];
    let mut stack = vec![tree.root()];
    while let Some(node) = stack.pop() {
        let scorer = match PosClass::of(&tree.token(node).upos) {
            Some(PosClass::N) => model_n,
            Some(PosClass::V) => model_v,
            None => None,
        };
        let config = local_config_at(tree, &children, node);
        order[node] = match scorer {
            Some(s) => sample_ordering(s, &config, rng)?
                .into_iter()
                .map(|k| config.elements[k].token)
                .collect(),
            None => config.elements.iter().map(|e| e.token).collect(),
        };
        stack.extend(children[node].iter().rev());
    }

    let mut linear = Vec::with_capacity(tree.len());
    linearize(tree.root(), &order, &mut linear);
    let mut new_index = vec![0usize; tree.len() + 1];
    for (pos, &old) in linear.iter().enumerate() {
        new_index[old] = pos + 1;
    }

    let mut notes = PermuteNotes::default();
    for line in &tree.interleaved {
        if line.is_multiword_range() {
            notes.multiword_dropped += 1;
        } else {
            notes.other_lines_dropped += 1;
        }
    }
    let tokens = linear
        .iter()
        .map(|&old| {
            let mut tok = tree.token(old).clone();
            tok.index = new_index[old];
            tok.head = new_index[tok.head];
            if tok.misc_value(ORIG_IDX).is_none() {
                let tag = format!("{ORIG_IDX}={old}");
                tok.misc = if tok.misc == "_" {
                    tag
                } else {
                    format!("{}|{tag}", tok.misc)
                };
            }
            match remap_deps(&tok.deps, &new_index) {
                Some(deps) => tok.deps = deps,
                None => {
                    tok.deps = "_".to_string();
                    notes.deps_cleared += 1;
                }
            }
            tok
        })
        .collect();
    let out = DepTree {
        comments: tree.comments.clone(),
        tokens,
        interleaved: Vec::new(),
        source_id: tree.source_id.clone(),
    };
    Ok((out, notes))
}

fn linearize(node: usize, order: &[Vec<usize>], out: &mut Vec<usize>) {
    for &m in &order[node] {
        if m == node {
            out.push(node);
        } else {
            linearize(m, order, out);
        }
    }
}

/// Remap `head:rel` entries; `None` if any head is not a plain token index.
fn remap_deps(deps: &str, new_index: &[usize]) -> Option<String> {
    if deps == "_" {
        return Some(deps.to_string());
    }
    let entries: Option<Vec<String>> = deps
        .split('|')
        .map(|entry| {
            let (head, rel) = entry.split_once(':')?;
            let head: usize = head.parse().ok()?;
            let mapped = *new_index.get(head)?;
            Some(format!("{mapped}:{rel}"))
        })
        .collect();
    let mut entries = entries?;
    entries.sort_by_key(|e| e.split(':').next().and_then(|h| h.parse::<usize>().ok()));
    Some(entries.join("|"))
}
