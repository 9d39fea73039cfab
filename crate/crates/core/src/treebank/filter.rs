use std::fmt;

use super::tree::DepTree;

/// Largest fan-out (head plus dependents) that synthesis will permute.
pub const MAX_GENERATION_FANOUT: usize = 7;
/// Largest fan-out used when training ordering models.
pub const MAX_TRAINING_FANOUT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropReason {
    NonProjective,
    Fanout,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropReason::NonProjective => "nonprojective",
            DropReason::Fanout => "fanout",
        })
    }
}

/// Why a tree is unusable for generation, if it is.
pub fn generation_defect(tree: &DepTree) -> Option<DropReason> {
    if !tree.is_projective() {
        Some(DropReason::NonProjective)
    } else if tree.max_fanout() > MAX_GENERATION_FANOUT {
        Some(DropReason::Fanout)
    } else {
        None
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub total: usize,
    pub kept: usize,
    pub dropped_nonprojective: usize,
    pub dropped_fanout: usize,
    /// `(source_id, reason)` for every dropped tree, in input order.
    pub dropped: Vec<(String, DropReason)>,
}

/// Keep projective trees whose every node has fan-out at most 7.
pub fn filter_for_generation(trees: Vec<DepTree>) -> (Vec<DepTree>, FilterReport) {
    let (kept, report) = filter_with_positions(trees);
    (kept.into_iter().map(|(_, t)| t).collect(), report)
}

/// As [`filter_for_generation`], pairing each kept tree with its 0-based
/// position in the input.
pub fn filter_with_positions(trees: Vec<DepTree>) -> (Vec<(usize, DepTree)>, FilterReport) {
    let mut report = FilterReport {
        total: trees.len(),
        ..Default::default()
    };
    let mut kept = Vec::with_capacity(trees.len());
    for (pos, tree) in trees.into_iter().enumerate() {
        match generation_defect(&tree) {
            None => kept.push((pos, tree)),
            Some(reason) => {
                match reason {
                    DropReason::NonProjective => report.dropped_nonprojective += 1,
                    DropReason::Fanout => report.dropped_fanout += 1,
                }
                report.dropped.push((tree.source_id.clone(), reason));
            }
        }
    }
    report.kept = kept.len();
    (kept, report)
}
