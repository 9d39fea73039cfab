mod common;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use galactic::features::build_h_whitelist;
use galactic::ordering::{train, OrderingModel, Sjt, TrainOptions};
use galactic::synthesis::{
    cross_product, permute_tree, read_manifest, sample_ordering, synthesize_language, LanguageSpec,
    ModelStore, RngStream, SynthesisOptions, ORIG_IDX,
};
use galactic::treebank::{
    filter_for_generation, parse_conllu, training_configs, DepTree, LabelMode, LocalConfig,
    PosClass,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{chi_square, every_move, load, random_config, random_model, treebank_dir};

fn trained(lang: &str, class: PosClass) -> OrderingModel {
    let trees = load(lang, "train");
    let configs = training_configs(&trees, class);
    let whitelist = build_h_whitelist(&configs);
    train(lang, class, &configs, &whitelist, &TrainOptions::default()).unwrap()
}

fn models() -> &'static Vec<OrderingModel> {
    static MODELS: OnceLock<Vec<OrderingModel>> = OnceLock::new();
    MODELS.get_or_init(|| {
        ["en", "fr", "hi"]
            .iter()
            .flat_map(|l| PosClass::ALL.map(|c| trained(l, c)))
            .collect()
    })
}

fn model(lang: &str, class: PosClass) -> &'static OrderingModel {
    models()
        .iter()
        .find(|m| m.language == lang && m.pos_class == class)
        .unwrap()
}

fn store() -> ModelStore {
    ModelStore::in_memory(models().iter().cloned())
}

#[test]
fn sampler_matches_enumerated_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [2, 3, 4] {
        let config = random_config(&mut rng, n);
        let m = random_model(&mut rng, &config, 1.0);
        let scorer = m.scorer();
        let en = scorer.enumerate(&config).unwrap();
        let perms: Vec<Vec<usize>> = Sjt::new(n).unwrap().map(|(p, _)| p).collect();
        let index: HashMap<Vec<usize>, usize> = perms
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        let mut counts = vec![0u64; perms.len()];
        let mut stream = RngStream::derive(&["sampler", &n.to_string()]);
        for _ in 0..100_000 {
            counts[index[&sample_ordering(&scorer, &config, &mut stream).unwrap()]] += 1;
        }
        let probs: Vec<f64> = (0..perms.len()).map(|k| en.prob(k)).collect();
        let p = chi_square(&counts, &probs);
        assert!(p > 0.001, "n = {n}: p = {p}");
        assert_eq!(stream.draws(), 100_000);
    }
}

#[test]
fn zero_model_samples_uniformly() {
    let m = OrderingModel::zero("x", PosClass::N);
    let scorer = m.scorer();
    let config = common::worked_subtree();
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let mut stream = RngStream::derive(&["uniform"]);
    for _ in 0..60_000 {
        *counts
            .entry(sample_ordering(&scorer, &config, &mut stream).unwrap())
            .or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    for c in counts.values() {
        assert!((*c as f64 / 60_000.0 - 1.0 / 6.0).abs() < 0.01);
    }
}

fn first_output_matching(
    tree: &DepTree,
    n: Option<&OrderingModel>,
    v: Option<&OrderingModel>,
    want: impl Fn(&str) -> bool,
) -> Option<String> {
    let sn = n.map(OrderingModel::scorer);
    let sv = v.map(OrderingModel::scorer);
    (1..=2000).find_map(|k| {
        let mut rng = RngStream::for_sentence(0, "every-move", "train", k);
        let (out, _) = permute_tree(tree, sn.as_ref(), sv.as_ref(), &mut rng).unwrap();
        let text = out.to_string();
        want(&text).then_some(text)
    })
}

#[test]
fn every_move_orders_are_attainable() {
    let tree = every_move();
    let hindi_v = model("hi", PosClass::V);
    let target = "Every move Google makes this particular future closer brings .";
    assert!(first_output_matching(&tree, None, Some(hindi_v), |s| s == target).is_some());

    let french_n = model("fr", PosClass::N);
    assert!(first_output_matching(&tree, Some(french_n), None, |s| s
        .contains("this future particular"))
    .is_some());
}

#[test]
fn no_models_is_identity_plus_alignment() {
    for tree in filter_for_generation(load("en", "dev")).0 {
        let mut rng = RngStream::derive(&["id"]);
        let (out, _) = permute_tree(&tree, None, None, &mut rng).unwrap();
        assert_eq!(rng.draws(), 0);
        for (a, b) in out.tokens.iter().zip(&tree.tokens) {
            assert_eq!((a.index, a.head, &a.form), (b.index, b.head, &b.form));
            assert_eq!(a.misc_value(ORIG_IDX), Some(b.index.to_string().as_str()));
        }
    }
}

fn token_multiset(tree: &DepTree) -> Vec<(String, String, String, String)> {
    let mut v: Vec<_> = tree
        .tokens
        .iter()
        .map(|t| {
            (
                t.form.clone(),
                t.lemma.clone(),
                t.upos.clone(),
                t.deprel.clone(),
            )
        })
        .collect();
    v.sort();
    v
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn synthesized_language_invariants() {
    let store = store();
    let spec: LanguageSpec = "en~fr@N~hi@V".parse().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let report = synthesize_language(
        &spec,
        &treebank_dir("en"),
        &store,
        tmp.path(),
        &SynthesisOptions::default(),
    )
    .unwrap();
    assert_eq!(report.output_dir, tmp.path().join("en~fr@N~hi@V"));
    let files = read_dir_bytes(&report.output_dir);
    let names: Vec<&str> = files.keys().map(String::as_str).collect();
    assert_eq!(
        names,
        [
            "en~fr@N~hi@V-ud-dev.conllu",
            "en~fr@N~hi@V-ud-test.conllu",
            "en~fr@N~hi@V-ud-train.conllu",
            "manifest.tsv"
        ]
    );

    for split in ["train", "dev", "test"] {
        let (source, _) = filter_for_generation(load("en", split));
        let text =
            String::from_utf8(files[&format!("en~fr@N~hi@V-ud-{split}.conllu")].clone()).unwrap();
        let out = parse_conllu(&text, LabelMode::Strict).unwrap();
        assert_eq!(out.len(), source.len());
        for (o, s) in out.iter().zip(&source) {
            assert!(o.is_projective());
            assert_eq!(token_multiset(o), token_multiset(s));
            let mut idx: Vec<usize> = o
                .tokens
                .iter()
                .map(|t| t.misc_value(ORIG_IDX).unwrap().parse().unwrap())
                .collect();
            for t in &o.tokens {
                let orig = s.token(idx[t.index - 1]);
                let head = if t.head == 0 { 0 } else { idx[t.head - 1] };
                assert_eq!((head, &t.form), (orig.head, &orig.form));
            }
            idx.sort_unstable();
            assert_eq!(idx, (1..=s.len()).collect::<Vec<_>>());
        }
    }
    let manifest: BTreeMap<String, String> =
        read_manifest(std::str::from_utf8(&files["manifest.tsv"]).unwrap())
            .into_iter()
            .collect();
    assert_eq!(manifest["train.kept"], "48");
    assert_eq!(
        manifest["train.dropped_ids"],
        "en-train-011:nonprojective,en-train-021:fanout"
    );

    let again = tempfile::tempdir().unwrap();
    let serial = SynthesisOptions {
        parallel: false,
        ..Default::default()
    };
    synthesize_language(&spec, &treebank_dir("en"), &store, again.path(), &serial).unwrap();
    assert_eq!(read_dir_bytes(&again.path().join("en~fr@N~hi@V")), files);
}

#[test]
fn self_permutation_changes_trees() {
    let store = store();
    let spec: LanguageSpec = "fr~fr@N~fr@V".parse().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let report = synthesize_language(
        &spec,
        &treebank_dir("fr"),
        &store,
        tmp.path(),
        &SynthesisOptions::default(),
    )
    .unwrap();
    let text = fs::read_to_string(report.output_dir.join("fr~fr@N~fr@V-ud-dev.conllu")).unwrap();
    let out = parse_conllu(&text, LabelMode::Strict).unwrap();
    let source = load("fr", "dev");
    let changed = out
        .iter()
        .zip(&source)
        .filter(|(o, s)| o.to_string() != s.to_string())
        .count();
    assert!(changed > 0);
}

#[test]
fn different_seeds_differ_and_same_seed_repeats() {
    let store = store();
    let run = |seed: u64| {
        let mut spec: LanguageSpec = "hi~en@V".parse().unwrap();
        spec.seed = seed;
        let tmp = tempfile::tempdir().unwrap();
        let r = synthesize_language(
            &spec,
            &treebank_dir("hi"),
            &store,
            tmp.path(),
            &SynthesisOptions::default(),
        )
        .unwrap();
        fs::read(r.output_dir.join("hi~en@V-ud-train.conllu")).unwrap()
    };
    assert_eq!(run(0), run(0));
    assert_ne!(run(0), run(1));
}

#[test]
fn missing_models_are_reported() {
    let store = ModelStore::in_memory([model("en", PosClass::N).clone()]);
    let spec: LanguageSpec = "en~xx@N".parse().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let err = synthesize_language(
        &spec,
        &treebank_dir("en"),
        &store,
        tmp.path(),
        &SynthesisOptions::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("xx"));
}

#[test]
fn every_cross_product_name_round_trips() {
    let langs: Vec<String> = (0..37).map(|i| format!("l{i:02}")).collect();
    let mut count = 0;
    for spec in cross_product(&langs) {
        let back: LanguageSpec = spec.dir_name().parse().unwrap();
        assert_eq!(back, spec);
        count += 1;
    }
    assert_eq!(count, 53_428);
}

#[test]
fn two_element_sampler_frequency() {
    let m = OrderingModel::with_weights("x", PosClass::N, [("A.BOS.BOS.DET.det", 1.0)]);
    let scorer = m.scorer();
    let config = LocalConfig::from_pairs(&[("DET", "det"), ("X", "head")]);
    let mut stream = RngStream::derive(&["two"]);
    let det_first = (0..10_000)
        .filter(|_| sample_ordering(&scorer, &config, &mut stream).unwrap() == [0, 1])
        .count();
    let e = std::f64::consts::E;
    assert!((det_first as f64 / 10_000.0 - e / (e + 1.0)).abs() < 0.01);
}
