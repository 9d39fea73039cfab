use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::ordering::OrderingModel;
use crate::treebank::{
    filter_with_positions, parse_conllu, serialize_conllu, DepTree, FilterReport, LabelMode,
    PosClass,
};

use super::permute::{permute_tree, PermuteNotes};
use super::rng::{RngStream, RNG_SCHEME};
use super::spec::LanguageSpec;
use super::SynthesisError;

pub const SPLITS: [&str; 3] = ["train", "dev", "test"];
pub const MANIFEST: &str = "manifest.tsv";
pub const TOOL_VERSION: &str = concat!("galactic ", env!("CARGO_PKG_VERSION"));

/// File name of the model for `(language, class)` inside a store directory.
pub fn model_file_name(language: &str, class: PosClass) -> String {
    format!("{language}-{class}.model")
}

/// Ordering models on disk, loaded on first use.
#[derive(Debug, Default)]
pub struct ModelStore {
    root: Option<PathBuf>,
    cache: RwLock<HashMap<(String, PosClass), Arc<OrderingModel>>>,
}

impl ModelStore {
    pub fn open(root: impl Into<PathBuf>) -> Self {
        ModelStore {
            root: Some(root.into()),
            cache: RwLock::default(),
        }
    }

    /// A store holding only the given models.
    pub fn in_memory(models: impl IntoIterator<Item = OrderingModel>) -> Self {
        let store = ModelStore::default();
        for m in models {
            store.insert(m);
        }
        store
    }

    pub fn insert(&self, model: OrderingModel) {
        let key = (model.language.clone(), model.pos_class);
        self.cache.write().unwrap().insert(key, Arc::new(model));
    }

    pub fn get(
        &self,
        language: &str,
        class: PosClass,
    ) -> Result<Arc<OrderingModel>, SynthesisError> {
        let key = (language.to_string(), class);
        if let Some(m) = self.cache.read().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let missing = || SynthesisError::MissingModel {
            language: language.to_string(),
            class,
        };
        let root = self.root.as_ref().ok_or_else(missing)?;
        let path = root.join(model_file_name(language, class));
        if !path.is_file() {
            return Err(missing());
        }
        let text = fs::read_to_string(&path).map_err(|e| SynthesisError::io(&path, e))?;
        let model = OrderingModel::from_text(&text)?;
        if model.pos_class != class {
            return Err(SynthesisError::ModelMismatch(path, model.pos_class, class));
        }
        let model = Arc::new(model);
        self.cache.write().unwrap().insert(key, model.clone());
        Ok(model)
    }
}

/// Locate `<prefix>-ud-<split>.conllu` (or `<split>.conllu`) in `dir`.
pub fn find_split(dir: &Path, split: &str) -> Result<PathBuf, SynthesisError> {
    let entries = fs::read_dir(dir).map_err(|e| SynthesisError::io(dir, e))?;
    let suffix = format!("-ud-{split}.conllu");
    let bare = format!("{split}.conllu");
    let mut matches: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(&suffix) || n == bare)
        })
        .collect();
    matches.sort();
    match matches.len() {
        1 => Ok(matches.pop().unwrap()),
        0 => Err(SynthesisError::MissingSplit(
            dir.to_path_buf(),
            split.to_string(),
        )),
        _ => Err(SynthesisError::AmbiguousSplit(
            dir.to_path_buf(),
            split.to_string(),
        )),
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    pub label_mode: LabelMode,
    /// Permute sentences on the rayon pool; output bytes do not depend on it.
    pub parallel: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            label_mode: LabelMode::Strict,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SplitReport {
    pub split: String,
    pub input_file: String,
    pub filter: FilterReport,
    pub notes: PermuteNotes,
}

#[derive(Clone, Debug)]
pub struct SynthesisReport {
    pub output_dir: PathBuf,
    pub splits: Vec<SplitReport>,
}

/// `(1 − λ)·θ_superstrate + λ·θ_substrate` for one class, if it has a superstrate.
pub fn class_model(
    spec: &LanguageSpec,
    class: PosClass,
    store: &ModelStore,
) -> Result<Option<OrderingModel>, SynthesisError> {
    let Some(superstrate) = spec.superstrate(class) else {
        return Ok(None);
    };
    let sup = store.get(superstrate, class)?;
    let sub = store.get(&spec.substrate, class)?;
    Ok(Some(OrderingModel::interpolate(&sup, &sub, spec.lambda)?))
}

/// Build the three split files and the manifest of `spec` under `out_root`.
pub fn synthesize_language(
    spec: &LanguageSpec,
    substrate_dir: &Path,
    store: &ModelStore,
    out_root: &Path,
    options: &SynthesisOptions,
) -> Result<SynthesisReport, SynthesisError> {
    let name = spec.dir_name();
    let model_n = class_model(spec, PosClass::N, store)?;
    let model_v = class_model(spec, PosClass::V, store)?;
    let scorer_n = model_n.as_ref().map(OrderingModel::scorer);
    let scorer_v = model_v.as_ref().map(OrderingModel::scorer);

    let inputs: Vec<PathBuf> = SPLITS
        .iter()
        .map(|split| find_split(substrate_dir, split))
        .collect::<Result<_, _>>()?;
    let out_dir = out_root.join(&name);
    fs::create_dir_all(&out_dir).map_err(|e| SynthesisError::io(&out_dir, e))?;

    let mut splits = Vec::new();
    for (split, input) in SPLITS.iter().zip(&inputs) {
        let text = fs::read_to_string(input).map_err(|e| SynthesisError::io(input, e))?;
        let trees = parse_conllu(&text, options.label_mode)
            .map_err(|e| SynthesisError::Parse(input.clone(), e))?;
        let (kept, filter) = filter_with_positions(trees);
        let permute_one = |(position, tree): &(usize, DepTree)| {
            let mut rng = RngStream::for_sentence(spec.seed, &name, split, position + 1);
            permute_tree(tree, scorer_n.as_ref(), scorer_v.as_ref(), &mut rng)
        };
        let results: Vec<_> = if options.parallel {
            kept.par_iter().map(permute_one).collect()
        } else {
            kept.iter().map(permute_one).collect()
        };
        let mut notes = PermuteNotes::default();
        let mut out_trees = Vec::with_capacity(results.len());
        for r in results {
            let (tree, n) = r?;
            notes.absorb(&n);
            out_trees.push(tree);
        }
        let out_path = out_dir.join(format!("{name}-ud-{split}.conllu"));
        fs::write(&out_path, serialize_conllu(&out_trees))
            .map_err(|e| SynthesisError::io(&out_path, e))?;
        splits.push(SplitReport {
            split: split.to_string(),
            input_file: input
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            filter,
            notes,
        });
    }

    let manifest = render_manifest(spec, &splits);
    let path = out_dir.join(MANIFEST);
    fs::write(&path, manifest).map_err(|e| SynthesisError::io(&path, e))?;
    Ok(SynthesisReport {
        output_dir: out_dir,
        splits,
    })
}

fn render_manifest(spec: &LanguageSpec, splits: &[SplitReport]) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: &str| {
        let _ = writeln!(out, "{k}\t{v}");
    };
    kv("spec", &spec.dir_name());
    kv("substrate", &spec.substrate);
    kv(
        "superstrate_N",
        spec.superstrate_n.as_deref().unwrap_or("-"),
    );
    kv(
        "superstrate_V",
        spec.superstrate_v.as_deref().unwrap_or("-"),
    );
    kv("lambda", &format!("{:?}", spec.lambda));
    kv("seed", &spec.seed.to_string());
    kv("rng", RNG_SCHEME);
    kv(
        "rng_stream",
        "sha256(scheme, seed, spec, split, sentence ordinal)",
    );
    kv(
        "node_order",
        "root-first depth-first, children in original order",
    );
    kv("tool_version", TOOL_VERSION);
    for s in splits {
        let key = |k: &str| format!("{}.{k}", s.split);
        let ids: Vec<String> = s
            .filter
            .dropped
            .iter()
            .map(|(id, reason)| format!("{id}:{reason}"))
            .collect();
        kv(&key("input"), &s.input_file);
        kv(&key("sentences"), &s.filter.total.to_string());
        kv(&key("kept"), &s.filter.kept.to_string());
        kv(
            &key("dropped_nonprojective"),
            &s.filter.dropped_nonprojective.to_string(),
        );
        kv(&key("dropped_fanout"), &s.filter.dropped_fanout.to_string());
        kv(
            &key("dropped_ids"),
            if ids.is_empty() {
                "-".to_string()
            } else {
                ids.join(",")
            }
            .as_str(),
        );
        kv(
            &key("multiword_lines_dropped"),
            &s.notes.multiword_dropped.to_string(),
        );
        kv(
            &key("other_lines_dropped"),
            &s.notes.other_lines_dropped.to_string(),
        );
        kv(&key("deps_cleared"), &s.notes.deps_cleared.to_string());
    }
    out
}

/// Parse `manifest.tsv` into key/value pairs.
pub fn read_manifest(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('\t'))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
