//! Exact sampling of orderings, tree permutation, and synthesis of whole
//! languages with deterministic per-sentence random streams.

mod language;
mod permute;
mod rng;
mod spec;

use std::path::{Path, PathBuf};

pub use language::{
    class_model, find_split, model_file_name, read_manifest, synthesize_language, ModelStore,
    SplitReport, SynthesisOptions, SynthesisReport, MANIFEST, SPLITS, TOOL_VERSION,
};
pub use permute::{permute_tree, sample_ordering, PermuteNotes, ORIG_IDX};
pub use rng::{RngStream, RNG_SCHEME};
pub use spec::{cross_product, LanguageSpec, SpecError};

use crate::ordering::OrderingError;
use crate::treebank::{DropReason, ParseError, PosClass};

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}: {1}")]
    Parse(PathBuf, ParseError),
    #[error("no {class} model for language {language:?}")]
    MissingModel { language: String, class: PosClass },
    #[error("{0}: holds a {1} model where a {2} model was expected")]
    ModelMismatch(PathBuf, PosClass, PosClass),
    #[error("{0}: no {1} split file")]
    MissingSplit(PathBuf, String),
    #[error("{0}: more than one {1} split file")]
    AmbiguousSplit(PathBuf, String),
    #[error("sentence {0} was not filtered for generation ({1})")]
    Unfiltered(String, DropReason),
    #[error(transparent)]
    Ordering(#[from] OrderingError),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

impl SynthesisError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        SynthesisError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
