//! Add-1 smoothed trigram language models over tag or word sequences,
//! perplexity, and maximum-likelihood source-language selection.
//!
//! `p(w3 | w1 w2) = (c(w1 w2 w3) + 1) / (c(w1 w2) + |V|)`, where `V` holds every
//! predictable symbol (EOS included, BOS excluded). An unseen history has
//! zero counts and therefore gets the uniform `1 / |V|`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::treebank::labels::UPOS_TAGS;

pub const BOS: &str = "<BOS>";
pub const EOS: &str = "<EOS>";
pub const OOV: &str = "<OOV>";
pub const DEFAULT_OOV_THRESHOLD: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LmMode {
    Tag,
    Word,
}

impl fmt::Display for LmMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LmMode::Tag => "tag",
            LmMode::Word => "word",
        })
    }
}

impl FromStr for LmMode {
    type Err = LmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tag" => Ok(LmMode::Tag),
            "word" => Ok(LmMode::Word),
            other => Err(LmError::Format(0, format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LmError {
    #[error("cannot train a language model on an empty corpus")]
    EmptyCorpus,
    #[error("no candidate languages to select from")]
    NoCandidates,
    #[error("symbol {0:?} contains whitespace and cannot be saved")]
    UnsavableSymbol(String),
    #[error("language model line {0}: {1}")]
    Format(usize, String),
}

type Trigram = (String, String, String);

#[derive(Clone, Debug, PartialEq)]
pub struct TrigramLM {
    pub mode: LmMode,
    /// Word mode: training words seen fewer times than this become OOV. 0 disables OOV mapping.
    pub oov_threshold: u64,
    vocab: BTreeSet<String>,
    trigrams: BTreeMap<Trigram, u64>,
    histories: HashMap<(String, String), u64>,
}

impl TrigramLM {
    /// Count trigrams over `BOS BOS s EOS` for every sequence.
    pub fn train(
        sequences: &[Vec<String>],
        mode: LmMode,
        oov_threshold: u64,
    ) -> Result<TrigramLM, LmError> {
        if sequences.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        let mut vocab: BTreeSet<String> = BTreeSet::new();
        vocab.insert(EOS.to_string());
        let mut frequent: Option<BTreeSet<String>> = None;
        match mode {
            LmMode::Tag => vocab.extend(UPOS_TAGS.iter().map(|t| t.to_string())),
            LmMode::Word if oov_threshold > 0 => {
                let mut counts: HashMap<&str, u64> = HashMap::new();
                for s in sequences.iter().flatten() {
                    *counts.entry(s).or_insert(0) += 1;
                }
                frequent = Some(
                    counts
                        .into_iter()
                        .filter(|&(_, c)| c >= oov_threshold)
                        .map(|(w, _)| w.to_string())
                        .collect(),
                );
                vocab.insert(OOV.to_string());
            }
            LmMode::Word => {}
        }
        let mut lm = TrigramLM {
            mode,
            oov_threshold,
            vocab,
            trigrams: BTreeMap::new(),
            histories: HashMap::new(),
        };
        for seq in sequences {
            let mapped: Vec<String> = seq
                .iter()
                .map(|w| match &frequent {
                    Some(keep) if !keep.contains(w) => OOV.to_string(),
                    _ => w.clone(),
                })
                .collect();
            lm.vocab.extend(mapped.iter().cloned());
            for tri in padded_trigrams(&mapped) {
                *lm.trigrams.entry(tri).or_insert(0) += 1;
            }
        }
        lm.rebuild_histories();
        Ok(lm)
    }

    /// A model with no counts: every symbol of `vocab` (plus EOS) has probability `1/|V|`.
    pub fn uniform(mode: LmMode, vocab: impl IntoIterator<Item = String>) -> TrigramLM {
        let mut v: BTreeSet<String> = vocab.into_iter().collect();
        v.insert(EOS.to_string());
        TrigramLM {
            mode,
            oov_threshold: 0,
            vocab: v,
            trigrams: BTreeMap::new(),
            histories: HashMap::new(),
        }
    }

    fn rebuild_histories(&mut self) {
        self.histories.clear();
        for ((a, b, _), &c) in &self.trigrams {
            *self.histories.entry((a.clone(), b.clone())).or_insert(0) += c;
        }
    }

    /// Predictable symbols.
    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Map an evaluation symbol onto the model's vocabulary.
    pub fn map_symbol<'a>(&self, w: &'a str) -> &'a str {
        if self.mode == LmMode::Word && self.oov_threshold > 0 && !self.vocab.contains(w) {
            OOV
        } else {
            w
        }
    }

    pub fn count(&self, w1: &str, w2: &str, w3: &str) -> u64 {
        self.trigrams
            .get(&(w1.to_string(), w2.to_string(), w3.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// `p(w3 | w1 w2)`; symbols must already be mapped.
    pub fn prob(&self, w1: &str, w2: &str, w3: &str) -> f64 {
        let history = self
            .histories
            .get(&(w1.to_string(), w2.to_string()))
            .copied()
            .unwrap_or(0);
        (self.count(w1, w2, w3) + 1) as f64 / (history as f64 + self.vocab.len() as f64)
    }

    /// `log2 p(s EOS | BOS BOS)` and the number of predicted positions.
    pub fn log2_prob(&self, seq: &[String]) -> (f64, usize) {
        let mapped: Vec<String> = seq.iter().map(|w| self.map_symbol(w).to_string()).collect();
        let mut total = 0.0;
        let mut n = 0;
        for (a, b, c) in padded_trigrams(&mapped) {
            total += self.prob(&a, &b, &c).log2();
            n += 1;
        }
        (total, n)
    }

    /// `2^(−(1/N) Σ log2 p)` over every predicted position, EOS included.
    pub fn perplexity(&self, sequences: &[Vec<String>]) -> f64 {
        let (total, n) = sequences
            .iter()
            .map(|s| self.log2_prob(s))
            .fold((0.0, 0), |(t, n), (lp, k)| (t + lp, n + k));
        if n == 0 {
            return 1.0;
        }
        (-total / n as f64).exp2()
    }

    pub fn to_text(&self) -> Result<String, LmError> {
        let mut out = String::new();
        let _ = writeln!(out, "#mode {}", self.mode);
        let _ = writeln!(out, "#oov_threshold {}", self.oov_threshold);
        let _ = writeln!(out, "#vocab_size {}", self.vocab.len());
        for s in &self.vocab {
            check_symbol(s)?;
            let _ = writeln!(out, "#symbol {s}");
        }
        for ((a, b, c), n) in &self.trigrams {
            let _ = writeln!(out, "{a} {b} {c}\t{n}");
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<TrigramLM, LmError> {
        let mut mode = None;
        let mut oov_threshold = 0;
        let mut vocab_size = None;
        let mut vocab = BTreeSet::new();
        let mut trigrams = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let bad = |m: &str| LmError::Format(i + 1, m.to_string());
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let (k, v) = h.split_once(' ').ok_or_else(|| bad("malformed header"))?;
                match k {
                    "mode" => mode = Some(v.parse::<LmMode>().map_err(|_| bad("bad mode"))?),
                    "oov_threshold" => {
                        oov_threshold = v.parse().map_err(|_| bad("bad oov_threshold"))?
                    }
                    "vocab_size" => {
                        vocab_size = Some(v.parse::<usize>().map_err(|_| bad("bad vocab_size"))?)
                    }
                    "symbol" => {
                        vocab.insert(v.to_string());
                    }
                    _ => {}
                }
                continue;
            }
            let (gram, count) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected trigram\\tcount"))?;
            let words: Vec<&str> = gram.split(' ').collect();
            if words.len() != 3 {
                return Err(bad("expected three symbols"));
            }
            let count: u64 = count.parse().map_err(|_| bad("bad count"))?;
            trigrams.insert(
                (
                    words[0].to_string(),
                    words[1].to_string(),
                    words[2].to_string(),
                ),
                count,
            );
        }
        let mode = mode.ok_or_else(|| LmError::Format(0, "missing #mode".into()))?;
        if vocab_size != Some(vocab.len()) {
            return Err(LmError::Format(
                0,
                "#vocab_size disagrees with #symbol lines".into(),
            ));
        }
        let mut lm = TrigramLM {
            mode,
            oov_threshold,
            vocab,
            trigrams,
            histories: HashMap::new(),
        };
        lm.rebuild_histories();
        Ok(lm)
    }
}

fn check_symbol(s: &str) -> Result<(), LmError> {
    if s.chars().any(char::is_whitespace) {
        Err(LmError::UnsavableSymbol(s.to_string()))
    } else {
        Ok(())
    }
}

fn padded_trigrams(seq: &[String]) -> Vec<Trigram> {
    let mut padded: Vec<&str> = vec![BOS, BOS];
    padded.extend(seq.iter().map(String::as_str));
    padded.push(EOS);
    padded
        .windows(3)
        .map(|w| (w[0].to_string(), w[1].to_string(), w[2].to_string()))
        .collect()
}

/// One row of a selection report.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRow {
    pub language: String,
    pub log2prob: f64,
    pub rank: usize,
}

/// Candidates ranked by total log-probability of the target sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub best: String,
    pub table: Vec<SelectionRow>,
}

impl Selection {
    /// Tab-separated report with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("language\tlog2prob\trank\n");
        for row in &self.table {
            let _ = writeln!(out, "{}\t{:.6}\t{}", row.language, row.log2prob, row.rank);
        }
        out
    }
}

/// Pick the candidate under which the target sequences are most probable;
/// ties go to the lexicographically smallest language id.
pub fn select_source(
    candidates: &[(String, TrigramLM)],
    targets: &[Vec<String>],
) -> Result<Selection, LmError> {
    if candidates.is_empty() {
        return Err(LmError::NoCandidates);
    }
    let mut scored: Vec<(String, f64)> = candidates
        .iter()
        .map(|(id, lm)| {
            let total: f64 = targets.iter().map(|s| lm.log2_prob(s).0).sum();
            (id.clone(), total)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let table: Vec<SelectionRow> = scored
        .into_iter()
        .enumerate()
        .map(|(i, (language, log2prob))| SelectionRow {
            language,
            log2prob,
            rank: i + 1,
        })
        .collect();
    Ok(Selection {
        best: table[0].language.clone(),
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seqs(raw: &[&[&str]]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|s| s.iter().map(|w| w.to_string()).collect())
            .collect()
    }

    #[test]
    fn smallest_corpus() {
        let lm = TrigramLM::train(&seqs(&[&["A"]]), LmMode::Word, 0).unwrap();
        assert_eq!(lm.vocab_size(), 2);
        assert!((lm.prob(BOS, BOS, "A") - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unseen_trigram_under_seen_history() {
        let lm = TrigramLM::train(&seqs(&[&["A", "B"], &["A", "A"]]), LmMode::Word, 0).unwrap();
        // history (BOS, A) seen twice, |V| = 3
        assert!((lm.prob(BOS, "A", EOS) - 1.0 / 5.0).abs() < 1e-15);
        // unseen history is uniform
        assert!((lm.prob("B", "B", "A") - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn oov_threshold_boundary() {
        let mut corpus = vec![vec!["rare".to_string()]; 9];
        corpus.extend(vec![vec!["common".to_string()]; 10]);
        let lm = TrigramLM::train(&corpus, LmMode::Word, 10).unwrap();
        assert!(!lm.vocab().contains("rare"));
        assert!(lm.vocab().contains("common"));
        assert_eq!(lm.count(BOS, BOS, OOV), 9);
        assert_eq!(lm.map_symbol("unseen"), OOV);
    }

    #[test]
    fn tag_mode_uses_closed_tagset() {
        let lm = TrigramLM::train(&seqs(&[&["NOUN", "VERB"]]), LmMode::Tag, 10).unwrap();
        assert_eq!(lm.vocab_size(), 18);
        assert_eq!(lm.map_symbol("FOO"), "FOO");
    }

    #[test]
    fn empty_corpus_and_candidates() {
        assert!(matches!(
            TrigramLM::train(&[], LmMode::Tag, 10),
            Err(LmError::EmptyCorpus)
        ));
        assert!(matches!(
            select_source(&[], &[]),
            Err(LmError::NoCandidates)
        ));
    }

    #[test]
    fn uniform_perplexity_is_vocab_size() {
        let lm = TrigramLM::uniform(LmMode::Tag, ["a", "b", "c"].map(String::from));
        let p = lm.perplexity(&seqs(&[&["a", "c"], &["b"]]));
        assert!((p - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tie_break_and_single_candidate() {
        let lm = TrigramLM::train(&seqs(&[&["NOUN"]]), LmMode::Tag, 10).unwrap();
        let target = seqs(&[&["NOUN", "NOUN"]]);
        let sel = select_source(
            &[("ab".into(), lm.clone()), ("aa".into(), lm.clone())],
            &target,
        )
        .unwrap();
        assert_eq!(sel.best, "aa");
        assert_eq!(sel.table[1].rank, 2);
        let one = select_source(&[("zz".into(), lm)], &target).unwrap();
        assert_eq!(one.best, "zz");
        assert!(one.to_tsv().starts_with("language\tlog2prob\trank\n"));
    }

    #[test]
    fn text_round_trip() {
        let lm = TrigramLM::train(&seqs(&[&["a", "b"], &["b"]]), LmMode::Word, 2).unwrap();
        let back = TrigramLM::from_text(&lm.to_text().unwrap()).unwrap();
        assert_eq!(back, lm);
        let bad = TrigramLM::train(&seqs(&[&["a b"]]), LmMode::Word, 0).unwrap();
        assert!(matches!(bad.to_text(), Err(LmError::UnsavableSymbol(_))));
    }
}
