use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use galactic::features::build_h_whitelist;
use galactic::langmodel::{select_source, LmMode, TrigramLM};
use galactic::ordering::{freeness, train, OrderingModel, TrainOptions};
use galactic::synthesis::{
    find_split, read_manifest, synthesize_language, LanguageSpec, ModelStore, SynthesisOptions,
    MANIFEST, ORIG_IDX, SPLITS,
};
use galactic::treebank::{
    filter_for_generation, parse_conllu, serialize_conllu, touched_fraction, training_configs,
    DepTree, LabelMode, PosClass,
};
use rayon::prelude::*;

use crate::exit::{Invalid, Missing};
use crate::{
    BatchArgs, Cli, Command, Mode, PermuteArgs, PerplexityArgs, SelectArgs, StatsArgs,
    SynthesisArgs, TrainArgs, ValidateArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => train_cmd(a, cli.label_mode(LabelMode::Strict)),
        Command::Permute(a) => permute_cmd(a, cli.label_mode(LabelMode::Strict)),
        Command::Batch(a) => batch_cmd(a, cli.label_mode(LabelMode::Strict)),
        Command::Stats(a) => stats_cmd(a, cli.label_mode(LabelMode::Lenient)),
        Command::Perplexity(a) => perplexity_cmd(a, cli.label_mode(LabelMode::Lenient)),
        Command::Select(a) => select_cmd(a, cli.label_mode(LabelMode::Lenient)),
        Command::Validate(a) => validate_cmd(a, cli.label_mode(LabelMode::Strict)),
    }
}

fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Missing(format!("{}: no such file", path.display())).into());
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_trees(path: &Path, mode: LabelMode) -> Result<Vec<DepTree>> {
    let text = read_text(path)?;
    parse_conllu(&text, mode)
        .map_err(anyhow::Error::new)
        .with_context(|| format!("parsing {}", path.display()))
}

/// A CoNLL-U file as given, or the `split` file of a treebank directory.
fn conllu_path(path: &Path, split: &str) -> Result<PathBuf> {
    if path.is_dir() {
        Ok(find_split(path, split)?)
    } else if path.exists() {
        Ok(path.to_path_buf())
    } else {
        Err(Missing(format!("{}: no such file or directory", path.display())).into())
    }
}

/// `en` from `en-ud-train.conllu`; the directory name for bare split files.
fn infer_language(file: &Path, dir: &Path) -> String {
    let name = file
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default();
    match name.find("-ud-") {
        Some(i) => name[..i].to_string(),
        None => dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("unknown")
            .to_string(),
    }
}

fn train_class(
    language: &str,
    class: PosClass,
    trees: &[DepTree],
    options: &TrainOptions,
) -> Result<(OrderingModel, usize)> {
    let configs = training_configs(trees, class);
    if configs.is_empty() {
        log::warn!("{language}: no {class} configurations; writing a uniform model");
        return Ok((OrderingModel::zero(language, class), 0));
    }
    let whitelist = build_h_whitelist(&configs);
    let model = train(language, class, &configs, &whitelist, options)?;
    Ok((model, configs.len()))
}

fn train_cmd(a: &TrainArgs, mode: LabelMode) -> Result<()> {
    let file = conllu_path(&a.treebank, "train")?;
    let language = a
        .lang
        .clone()
        .unwrap_or_else(|| infer_language(&file, &a.treebank));
    let trees = read_trees(&file, mode)?;
    let options = TrainOptions {
        max_iterations: a.max_iterations,
        tolerance: a.tolerance,
        ..TrainOptions::default()
    };
    let (n, v) = rayon::join(
        || train_class(&language, PosClass::N, &trees, &options),
        || train_class(&language, PosClass::V, &trees, &options),
    );
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    println!("language\tpos\tconfigs\titerations\tconverged\tobjective\tmodel");
    for (model, configs) in [n?, v?] {
        let path = a.out.join(galactic::synthesis::model_file_name(
            &language,
            model.pos_class,
        ));
        fs::write(&path, model.to_text()).with_context(|| format!("writing {}", path.display()))?;
        let meta = &model.training_meta;
        println!(
            "{language}\t{}\t{configs}\t{}\t{}\t{:.6}\t{}",
            model.pos_class,
            meta.iterations,
            meta.converged,
            meta.objective,
            path.display()
        );
    }
    Ok(())
}

fn spec_from(text: &str, s: &SynthesisArgs) -> Result<LanguageSpec> {
    let mut spec: LanguageSpec = text.trim().parse()?;
    if !(0.0..=1.0).contains(&s.lambda) {
        bail!(galactic::ordering::OrderingError::BadLambda(s.lambda));
    }
    spec.seed = s.seed;
    spec.lambda = s.lambda;
    Ok(spec)
}

fn synthesize(
    spec: &LanguageSpec,
    s: &SynthesisArgs,
    store: &ModelStore,
    options: &SynthesisOptions,
) -> Result<String> {
    let substrate = s.substrates.join(&spec.substrate);
    if !substrate.is_dir() {
        return Err(Missing(format!(
            "{}: no substrate treebank directory",
            substrate.display()
        ))
        .into());
    }
    let report = synthesize_language(spec, &substrate, store, &s.out, options)
        .with_context(|| format!("synthesizing {spec}"))?;
    let counts: Vec<String> = report
        .splits
        .iter()
        .map(|r| format!("{}/{}", r.filter.kept, r.filter.total))
        .collect();
    Ok(format!(
        "{spec}\tok\t{}\t{}",
        counts.join("\t"),
        report.output_dir.display()
    ))
}

const SYNTH_HEADER: &str = "spec\tstatus\ttrain_kept\tdev_kept\ttest_kept\toutput";

fn permute_cmd(a: &PermuteArgs, mode: LabelMode) -> Result<()> {
    let spec = spec_from(&a.spec, &a.synthesis)?;
    let store = ModelStore::open(&a.synthesis.models);
    let options = SynthesisOptions {
        label_mode: mode,
        parallel: true,
    };
    let line = synthesize(&spec, &a.synthesis, &store, &options)?;
    println!("{SYNTH_HEADER}");
    println!("{line}");
    Ok(())
}

fn batch_cmd(a: &BatchArgs, mode: LabelMode) -> Result<()> {
    let file = File::open(&a.specs).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            anyhow!(Missing(format!("{}: no such file", a.specs.display())))
        } else {
            anyhow!(e).context(format!("opening {}", a.specs.display()))
        }
    })?;
    let store = ModelStore::open(&a.synthesis.models);
    // specs run side by side; sentences inside one spec stay sequential
    let options = SynthesisOptions {
        label_mode: mode,
        parallel: false,
    };
    let chunk = rayon::current_num_threads() * 4;
    let mut lines = BufReader::new(file).lines();
    let mut failures: Vec<anyhow::Error> = Vec::new();
    let mut done = 0usize;
    println!("{SYNTH_HEADER}");
    loop {
        let mut specs = Vec::with_capacity(chunk);
        for line in lines.by_ref() {
            let line = line.with_context(|| format!("reading {}", a.specs.display()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            specs.push(line.to_string());
            if specs.len() == chunk {
                break;
            }
        }
        if specs.is_empty() {
            break;
        }
        let results: Vec<(String, Result<String>)> = specs
            .par_iter()
            .map(|text| {
                let r = spec_from(text, &a.synthesis)
                    .and_then(|spec| synthesize(&spec, &a.synthesis, &store, &options));
                (text.clone(), r)
            })
            .collect();
        for (text, r) in results {
            done += 1;
            match r {
                Ok(line) => println!("{line}"),
                Err(e) => {
                    println!("{text}\tfailed\t-\t-\t-\t-");
                    log::error!("{text}: {e:#}");
                    failures.push(e);
                }
            }
        }
    }
    if let Some(first) = failures.into_iter().next() {
        return Err(first.context("batch had failing specs"));
    }
    log::info!("{done} specs synthesized");
    Ok(())
}

fn stats_cmd(a: &StatsArgs, mode: LabelMode) -> Result<()> {
    let store = a.models.as_ref().map(ModelStore::open);
    let mut out =
        String::from("language\tsplit\tsentences\tkept_sentences\ttokens\tkept_tokens\tT_pct\tR\n");
    for dir in &a.treebank {
        let file = conllu_path(dir, &a.split)?;
        let language = infer_language(&file, dir);
        let trees = read_trees(&file, mode)?;
        let tokens: usize = trees.iter().map(DepTree::len).sum();
        let (kept, report) = filter_for_generation(trees);
        let kept_tokens: usize = kept.iter().map(DepTree::len).sum();
        let t = 100.0 * touched_fraction(&kept);
        let r = match &store {
            Some(store) => {
                let n = store.get(&language, PosClass::N)?;
                let v = store.get(&language, PosClass::V)?;
                format!("{:.4}", freeness(&n, &v, &kept)?)
            }
            None => "-".to_string(),
        };
        out.push_str(&format!(
            "{language}\t{}\t{}\t{}\t{tokens}\t{kept_tokens}\t{t:.2}\t{r}\n",
            a.split, report.total, report.kept
        ));
    }
    print!("{out}");
    Ok(())
}

fn symbol_sequences(trees: &[DepTree], mode: LmMode) -> Vec<Vec<String>> {
    trees
        .iter()
        .map(|t| {
            t.tokens
                .iter()
                .map(|tok| match mode {
                    LmMode::Tag => tok.upos.clone(),
                    LmMode::Word => tok.form.clone(),
                })
                .collect()
        })
        .collect()
}

fn load_lm(path: &Path) -> Result<TrigramLM> {
    let text = read_text(path)?;
    TrigramLM::from_text(&text).with_context(|| format!("loading {}", path.display()))
}

fn perplexity_cmd(a: &PerplexityArgs, labels: LabelMode) -> Result<()> {
    let mode = match a.mode {
        Mode::Tag => LmMode::Tag,
        Mode::Word => LmMode::Word,
    };
    let (lm, training) = match (&a.train, &a.lm) {
        (Some(path), _) => {
            let trees = read_trees(&conllu_path(path, "train")?, labels)?;
            let seqs = symbol_sequences(&trees, mode);
            (TrigramLM::train(&seqs, mode, a.oov_threshold)?, Some(seqs))
        }
        (None, Some(path)) => (load_lm(path)?, None),
        (None, None) => unreachable!("clap requires --train or --lm"),
    };
    if let Some(path) = &a.save {
        fs::write(path, lm.to_text()?).with_context(|| format!("writing {}", path.display()))?;
    }
    let eval = match (&a.eval, training) {
        (Some(path), _) => {
            let trees = read_trees(&conllu_path(path, "dev")?, labels)?;
            symbol_sequences(&trees, lm.mode)
        }
        (None, Some(seqs)) => seqs,
        (None, None) => return Ok(()),
    };
    let predictions: usize = eval.iter().map(|s| s.len() + 1).sum();
    println!("mode\tvocab_size\tsequences\tpredictions\tperplexity");
    println!(
        "{}\t{}\t{}\t{predictions}\t{:.6}",
        lm.mode,
        lm.vocab_size(),
        eval.len(),
        lm.perplexity(&eval)
    );
    Ok(())
}

fn select_cmd(a: &SelectArgs, labels: LabelMode) -> Result<()> {
    let mut candidates = Vec::new();
    for raw in &a.candidates {
        let (id, path) = raw
            .split_once('=')
            .ok_or_else(|| Invalid(format!("candidate {raw:?} is not of the form id=path")))?;
        let path = Path::new(path);
        let lm = if path.is_dir() || path.extension().is_some_and(|e| e == "conllu") {
            let trees = read_trees(&conllu_path(path, "train")?, labels)?;
            TrigramLM::train(&symbol_sequences(&trees, LmMode::Tag), LmMode::Tag, 0)?
        } else {
            load_lm(path)?
        };
        if lm.mode != LmMode::Tag {
            return Err(
                Invalid(format!("candidate {id}: selection needs a tag-mode model")).into(),
            );
        }
        candidates.push((id.to_string(), lm));
    }
    let target = read_trees(&conllu_path(&a.target, &a.target_split)?, labels)?;
    let selection = select_source(&candidates, &symbol_sequences(&target, LmMode::Tag))?;
    print!("{}", selection.to_tsv());
    Ok(())
}

/// Problems found in one output file, empty when it is sound.
fn check_file(
    path: &Path,
    mode: LabelMode,
    substrate: Option<&[DepTree]>,
) -> Result<(usize, Vec<String>)> {
    let text = read_text(path)?;
    let trees = parse_conllu(&text, mode)
        .map_err(anyhow::Error::new)
        .with_context(|| format!("parsing {}", path.display()))?;
    let mut problems = Vec::new();
    if serialize_conllu(&trees) != text {
        problems.push("does not round-trip byte-identically".to_string());
    }
    for tree in &trees {
        let id = &tree.source_id;
        if !tree.is_projective() {
            problems.push(format!("{id}: not projective"));
        }
        if let Err(msg) = check_orig_idx(tree) {
            problems.push(format!("{id}: {msg}"));
        }
    }
    if let Some(source) = substrate {
        if source.len() != trees.len() {
            problems.push(format!(
                "{} sentences but the filtered substrate has {}",
                trees.len(),
                source.len()
            ));
        } else {
            for (out, src) in trees.iter().zip(source) {
                if let Err(msg) = check_alignment(out, src) {
                    problems.push(format!("{}: {msg}", out.source_id));
                }
            }
        }
    }
    Ok((trees.len(), problems))
}

fn orig_indices(tree: &DepTree) -> Option<Vec<usize>> {
    tree.tokens
        .iter()
        .map(|t| t.misc_value(ORIG_IDX).and_then(|v| v.parse().ok()))
        .collect()
}

fn check_orig_idx(tree: &DepTree) -> Result<(), String> {
    let annotated = tree
        .tokens
        .iter()
        .filter(|t| t.misc_value(ORIG_IDX).is_some())
        .count();
    if annotated == 0 {
        return Ok(());
    }
    let Some(mut idx) = orig_indices(tree).filter(|_| annotated == tree.len()) else {
        return Err(format!("{ORIG_IDX} missing or malformed on some tokens"));
    };
    idx.sort_unstable();
    if idx.iter().enumerate().any(|(i, &k)| k != i + 1) {
        return Err(format!(
            "{ORIG_IDX} is not a bijection onto 1..{}",
            tree.len()
        ));
    }
    Ok(())
}

/// Same tokens and the same dependency structure as the substrate sentence.
fn check_alignment(out: &DepTree, src: &DepTree) -> Result<(), String> {
    let idx = orig_indices(out).ok_or_else(|| format!("no {ORIG_IDX} alignment"))?;
    if out.len() != src.len() {
        return Err("token count differs from the substrate".to_string());
    }
    if let Some(&k) = idx.iter().find(|&&k| k == 0 || k > src.len()) {
        return Err(format!("{ORIG_IDX}={k} is outside the substrate sentence"));
    }
    for (tok, &k) in out.tokens.iter().zip(&idx) {
        let orig = src.token(k);
        if (&tok.form, &tok.lemma, &tok.upos, &tok.deprel)
            != (&orig.form, &orig.lemma, &orig.upos, &orig.deprel)
        {
            return Err(format!(
                "token {} differs from substrate token {k}",
                tok.index
            ));
        }
        let head = if tok.head == 0 { 0 } else { idx[tok.head - 1] };
        if head != orig.head {
            return Err(format!("token {} changed its head", tok.index));
        }
    }
    Ok(())
}

fn validate_cmd(a: &ValidateArgs, mode: LabelMode) -> Result<()> {
    if !a.dir.is_dir() {
        return Err(Missing(format!("{}: no such directory", a.dir.display())).into());
    }
    let mut files: Vec<PathBuf> = fs::read_dir(&a.dir)
        .with_context(|| format!("listing {}", a.dir.display()))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "conllu"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Missing(format!("{}: no CoNLL-U files", a.dir.display())).into());
    }

    let manifest_path = a.dir.join(MANIFEST);
    let manifest: BTreeMap<String, String> = if manifest_path.is_file() {
        read_manifest(&read_text(&manifest_path)?)
            .into_iter()
            .collect()
    } else {
        BTreeMap::new()
    };

    let mut failed = 0;
    println!("file\tsentences\tstatus");
    for path in &files {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        let split = SPLITS
            .iter()
            .find(|s| name.ends_with(&format!("-ud-{s}.conllu")) || name == format!("{s}.conllu"));
        let source = match (&a.substrate, split) {
            (Some(dir), Some(split)) => {
                let trees = read_trees(&find_split(dir, split)?, mode)?;
                Some(filter_for_generation(trees).0)
            }
            _ => None,
        };
        let (count, mut problems) = check_file(path, mode, source.as_deref())?;
        if let Some(kept) = split.and_then(|s| manifest.get(&format!("{s}.kept"))) {
            if kept.parse::<usize>().ok() != Some(count) {
                problems.push(format!("manifest records {kept} kept sentences"));
            }
        }
        if problems.is_empty() {
            println!("{name}\t{count}\tok");
        } else {
            failed += 1;
            println!("{name}\t{count}\tFAIL: {}", problems.join("; "));
        }
    }
    if !manifest.is_empty() {
        let dir_name = a
            .dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        if manifest.get("spec").map(String::as_str) != Some(dir_name) {
            failed += 1;
            println!("{MANIFEST}\t-\tFAIL: spec does not match directory name {dir_name:?}");
        } else {
            println!("{MANIFEST}\t-\tok");
        }
    }
    if failed > 0 {
        return Err(Invalid(format!("{failed} file(s) failed validation")).into());
    }
    Ok(())
}
