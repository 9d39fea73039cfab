//! Dependency treebanks: CoNLL-U I/O, tree validation, projectivity,
//! generation filtering and extraction of local head configurations.

mod config;
mod conllu;
mod filter;
pub mod labels;
mod tree;

pub use config::{
    local_config_at, local_configs, touched_tokens, Element, LocalConfig, PosClass, HEAD_RELATION,
};
pub use conllu::{
    parse_conllu, serialize_conllu, write_tree, LabelMode, ParseError, ParseErrorKind,
};
pub use filter::{
    filter_for_generation, filter_with_positions, generation_defect, DropReason, FilterReport,
    MAX_GENERATION_FANOUT, MAX_TRAINING_FANOUT,
};
pub use tree::{DepTree, InterleavedLine, Token, TreeError};

/// Fraction of tokens that are N/V heads or their dependents.
pub fn touched_fraction(trees: &[DepTree]) -> f64 {
    let total: usize = trees.iter().map(DepTree::len).sum();
    if total == 0 {
        return 0.0;
    }
    let touched: usize = trees.iter().map(touched_tokens).sum();
    touched as f64 / total as f64
}

/// Training configurations of one class: projective trees only, fan-out at most 6.
pub fn training_configs(trees: &[DepTree], class: PosClass) -> Vec<LocalConfig> {
    trees
        .iter()
        .filter(|t| t.is_projective())
        .flat_map(|t| local_configs(t, class))
        .filter(|c| c.n() <= MAX_TRAINING_FANOUT)
        .collect()
}
