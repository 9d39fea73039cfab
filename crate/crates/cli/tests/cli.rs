use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

fn treebanks() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/treebanks")
}

fn galactic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_galactic"))
        .args(args)
        .env_remove("GALACTIC_JOBS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = galactic(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    galactic(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Models for en, fr and hi trained once into a shared directory.
fn models() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        for lang in ["en", "fr", "hi"] {
            let tb = treebanks().join(lang);
            let out = ok(&["train", "--treebank", s(&tb), "--out", s(dir.path())]);
            assert!(out.contains(lang));
        }
        dir
    })
    .path()
}

#[test]
fn train_writes_one_model_per_class() {
    let dir = models();
    for (lang, class) in [("en", "N"), ("en", "V"), ("hi", "V")] {
        let text = fs::read_to_string(dir.join(format!("{lang}-{class}.model"))).unwrap();
        assert!(
            text.lines().any(|l| l == format!("#pos {class}")),
            "{lang}-{class}"
        );
    }
}

fn permute(spec: &str, out: &Path) -> String {
    ok(&[
        "permute",
        "--spec",
        spec,
        "--substrates",
        s(&treebanks()),
        "--models",
        s(models()),
        "--out",
        s(out),
    ])
}

#[test]
fn permute_is_deterministic_and_validates() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let report = permute("en~fr@N~hi@V", a.path());
    assert!(report.starts_with("spec\tstatus"));
    assert!(report.contains("en~fr@N~hi@V\tok\t48/50"));
    permute("en~fr@N~hi@V", b.path());
    for name in [
        "en~fr@N~hi@V-ud-train.conllu",
        "en~fr@N~hi@V-ud-dev.conllu",
        "manifest.tsv",
    ] {
        let x = fs::read(a.path().join("en~fr@N~hi@V").join(name)).unwrap();
        let y = fs::read(b.path().join("en~fr@N~hi@V").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let dir = a.path().join("en~fr@N~hi@V");
    let en = treebanks().join("en");
    ok(&["validate", "--dir", s(&dir), "--substrate", s(&en)]);

    // break the alignment of one token
    let train = dir.join("en~fr@N~hi@V-ud-train.conllu");
    let text = fs::read_to_string(&train).unwrap();
    let broken = text.replacen("OrigIdx=1", "OrigIdx=99", 1);
    assert_ne!(broken, text);
    fs::write(&train, broken).unwrap();
    assert_eq!(
        code(&["validate", "--dir", s(&dir), "--substrate", s(&en)]),
        6
    );
}

#[test]
fn batch_runs_every_spec() {
    let out = tempfile::tempdir().unwrap();
    let specs = out.path().join("specs.txt");
    fs::write(&specs, "# two languages\nhi~en@V\n\nfr~fr@N~fr@V\n").unwrap();
    let report = ok(&[
        "batch",
        "--specs",
        s(&specs),
        "--substrates",
        s(&treebanks()),
        "--models",
        s(models()),
        "--out",
        s(out.path()),
    ]);
    assert_eq!(report.lines().count(), 3);
    assert!(out.path().join("hi~en@V/manifest.tsv").is_file());
    assert!(out
        .path()
        .join("fr~fr@N~fr@V/fr~fr@N~fr@V-ud-test.conllu")
        .is_file());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere");
    assert_eq!(
        code(&["train", "--treebank", s(&missing), "--out", s(tmp.path())]),
        3
    );
    assert_eq!(code(&["stats", "--no-such-flag"]), 2);
    assert_eq!(
        code(&[
            "permute",
            "--spec",
            "en~fr@X",
            "--substrates",
            s(&treebanks()),
            "--models",
            s(models()),
            "--out",
            s(tmp.path()),
        ]),
        5
    );
    let bad = tmp.path().join("bad-ud-train.conllu");
    fs::write(&bad, "1\tx\tx\tNOUN\t_\t_\t7\troot\t_\t_\n\n").unwrap();
    assert_eq!(code(&["stats", "--treebank", s(&bad)]), 4);
}

#[test]
fn stats_reports_touched_fraction_and_freeness() {
    let hi = treebanks().join("hi");
    let out = ok(&[
        "stats",
        "--treebank",
        s(&hi),
        "--models",
        s(models()),
        "--split",
        "dev",
    ]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "language\tsplit\tsentences\tkept_sentences\ttokens\tkept_tokens\tT_pct\tR"
    );
    let row: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(&row[..3], ["hi", "dev", "40"]);
    let t: f64 = row[6].parse().unwrap();
    let r: f64 = row[7].parse().unwrap();
    assert!((0.0..=100.0).contains(&t));
    assert!(r > 0.0);
}

#[test]
fn perplexity_and_selection() {
    let tmp = tempfile::tempdir().unwrap();
    let lm = tmp.path().join("hi.lm");
    let hi = treebanks().join("hi");
    let out = ok(&[
        "perplexity",
        "--train",
        s(&hi),
        "--eval",
        s(&hi),
        "--save",
        s(&lm),
    ]);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[0], "tag");
    let ppl: f64 = row[4].parse().unwrap();
    assert!(ppl > 1.0 && ppl < 18.0);
    let again = ok(&["perplexity", "--lm", s(&lm), "--eval", s(&hi)]);
    assert_eq!(again, out);

    let en = treebanks().join("en");
    let sel = ok(&[
        "select",
        "--candidate",
        &format!("en={}", s(&en)),
        "--candidate",
        &format!("hi={}", s(&lm)),
        "--target",
        s(&hi),
        "--target-split",
        "test",
    ]);
    let best: Vec<&str> = sel.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!((best[0], best[2]), ("hi", "1"));
}

#[test]
fn help_lists_exit_status() {
    let out = ok(&["permute", "--help"]);
    assert!(out.contains("--seed"));
    assert!(out.contains("Exit status"));
}
