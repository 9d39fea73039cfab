//! Regenerates the bundled test treebanks under `tests/fixtures/treebanks`.
//!
//! Three toy languages share one grammar of noun phrases and clauses and
//! differ in dependent order: `en` (SVO, adjective before noun), `fr` (SVO,
//! adjective after noun) and `hi` (SOV, postpositions). A little noise swaps
//! adjacent dependents so no ordering is categorical.
//!
//!     cargo run -p galactic --example make_fixtures -- crates/core/tests/fixtures/treebanks

use std::fs;
use std::path::Path;

use galactic::treebank::{serialize_conllu, DepTree, Token};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy)]
enum Lang {
    En,
    Fr,
    Hi,
}

impl Lang {
    fn name(self) -> &'static str {
        match self {
            Lang::En => "en",
            Lang::Fr => "fr",
            Lang::Hi => "hi",
        }
    }

    fn noise(self) -> f64 {
        match self {
            Lang::Hi => 0.03,
            _ => 0.1,
        }
    }

    /// Relation order around a head, `head` marking the head itself.
    fn template(self, noun: bool) -> &'static [&'static str] {
        match (self, noun) {
            (Lang::En, true) => &["case", "det", "amod", "head", "nmod", "acl"],
            (Lang::Fr, true) => &["case", "det", "head", "amod", "nmod", "acl"],
            (Lang::Hi, true) => &["nmod", "acl", "det", "amod", "head", "case"],
            (Lang::En | Lang::Fr, false) => {
                &["mark", "nsubj", "aux", "head", "dobj", "advmod", "punct"]
            }
            (Lang::Hi, false) => &["mark", "nsubj", "dobj", "advmod", "head", "aux", "punct"],
        }
    }
}

struct Node {
    tag: &'static str,
    form: &'static str,
    rel: String,
    deps: Vec<Node>,
}

impl Node {
    fn leaf(tag: &'static str, form: &'static str, rel: &str) -> Node {
        Node {
            tag,
            form,
            rel: rel.to_string(),
            deps: Vec::new(),
        }
    }
}

const DET: &[&str] = &["the", "a", "this", "every"];
const ADJ: &[&str] = &["big", "small", "red", "particular", "old"];
const NOUN: &[&str] = &["dog", "cat", "move", "future", "house", "tree", "book"];
const PROPN: &[&str] = &["Google", "Mary", "Paris"];
const PRON: &[&str] = &["it", "she", "they"];
const VERB: &[&str] = &["brings", "sees", "makes", "likes", "reads"];
const ADV: &[&str] = &["quickly", "closer", "often"];
const AUX: &[&str] = &["will", "can"];
const ADP: &[&str] = &["of", "in", "with"];

fn pick(rng: &mut ChaCha8Rng, words: &[&'static str]) -> &'static str {
    words.choose(rng).unwrap()
}

fn noun_phrase(rng: &mut ChaCha8Rng, rel: &str, depth: usize) -> Node {
    let roll: f64 = rng.gen();
    if roll < 0.15 {
        return Node::leaf("PRON", pick(rng, PRON), rel);
    }
    if roll < 0.3 {
        return Node::leaf("PROPN", pick(rng, PROPN), rel);
    }
    let mut node = Node::leaf("NOUN", pick(rng, NOUN), rel);
    if rng.gen_bool(0.8) {
        node.deps.push(Node::leaf("DET", pick(rng, DET), "det"));
    }
    for _ in 0..2 {
        if rng.gen_bool(0.35) {
            node.deps.push(Node::leaf("ADJ", pick(rng, ADJ), "amod"));
        }
    }
    if depth < 2 && rng.gen_bool(0.2) {
        let mut pp = noun_phrase(rng, "nmod", depth + 1);
        pp.deps.push(Node::leaf("ADP", pick(rng, ADP), "case"));
        node.deps.push(pp);
    }
    if depth < 1 && rng.gen_bool(0.12) {
        let mut rc = Node::leaf("VERB", pick(rng, VERB), "acl:relcl");
        rc.deps.push(noun_phrase(rng, "nsubj", depth + 2));
        node.deps.push(rc);
    }
    node
}

fn clause(rng: &mut ChaCha8Rng, rel: &str, depth: usize) -> Node {
    let mut verb = Node::leaf("VERB", pick(rng, VERB), rel);
    if rng.gen_bool(0.9) {
        verb.deps.push(noun_phrase(rng, "nsubj", depth));
    }
    if rng.gen_bool(0.2) {
        verb.deps.push(Node::leaf("AUX", pick(rng, AUX), "aux"));
    }
    if rng.gen_bool(0.65) {
        verb.deps.push(noun_phrase(rng, "dobj", depth));
    }
    if rng.gen_bool(0.35) {
        verb.deps.push(Node::leaf("ADV", pick(rng, ADV), "advmod"));
    }
    if depth == 0 {
        verb.deps.push(Node::leaf("PUNCT", ".", "punct"));
    }
    verb
}

/// Order dependents by the language template, then maybe swap two adjacent members.
fn order(node: &Node, lang: Lang, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let template = lang.template(node.tag != "VERB");
    let rank = |rel: &str| {
        let base = rel.split(':').next().unwrap();
        template
            .iter()
            .position(|r| *r == base)
            .unwrap_or(template.len())
    };
    let mut members: Vec<Option<usize>> = (0..node.deps.len()).map(Some).collect();
    members.push(None);
    members.sort_by_key(|m| match m {
        Some(i) => rank(&node.deps[*i].rel),
        None => rank("head"),
    });
    if members.len() >= 2 && rng.gen_bool(lang.noise()) {
        let i = rng.gen_range(0..members.len() - 1);
        let is_punct = |m: &Option<usize>| m.is_some_and(|k| node.deps[k].tag == "PUNCT");
        if !is_punct(&members[i]) && !is_punct(&members[i + 1]) {
            members.swap(i, i + 1);
        }
    }
    members
}

fn linearize(node: &Node, head: usize, lang: Lang, rng: &mut ChaCha8Rng, out: &mut Vec<Token>) {
    // reserve the head's index once its position is known
    let members = order(node, lang, rng);
    let mut pending: Vec<(usize, usize)> = Vec::new();
    let mut my_index = 0;
    for m in &members {
        match m {
            None => {
                my_index = out.len() + 1;
                out.push(Token::new(my_index, node.form, node.tag, head, &node.rel));
            }
            Some(k) => {
                let start = out.len();
                linearize(&node.deps[*k], usize::MAX, lang, rng, out);
                pending.push((start, out.len()));
            }
        }
    }
    // children were emitted with a placeholder head; point them at this node
    for (start, end) in pending {
        for tok in &mut out[start..end] {
            if tok.head == usize::MAX {
                tok.head = my_index;
            }
        }
    }
}

fn sentence(lang: Lang, rng: &mut ChaCha8Rng, id: &str) -> DepTree {
    let root = clause(rng, "root", 0);
    let mut tokens = Vec::new();
    linearize(&root, 0, lang, rng, &mut tokens);
    for t in &mut tokens {
        t.lemma = t.form.to_lowercase();
    }
    let text: Vec<String> = tokens.iter().map(|t| t.form.clone()).collect();
    let mut tree = DepTree::new(tokens);
    tree.comments = vec![
        format!("# sent_id = {id}"),
        format!("# text = {}", text.join(" ")),
    ];
    tree.source_id = id.to_string();
    tree
}

fn nonprojective(id: &str) -> DepTree {
    let rows: [(&str, &str, usize, &str); 9] = [
        ("A", "DET", 2, "det"),
        ("hearing", "NOUN", 4, "nsubj"),
        ("is", "AUX", 4, "aux"),
        ("scheduled", "VERB", 0, "root"),
        ("on", "ADP", 7, "case"),
        ("the", "DET", 7, "det"),
        ("issue", "NOUN", 2, "nmod"),
        ("today", "NOUN", 4, "nmod"),
        (".", "PUNCT", 4, "punct"),
    ];
    hand_tree(id, &rows)
}

fn wide(id: &str) -> DepTree {
    let rows: [(&str, &str, usize, &str); 8] = [
        ("she", "PRON", 2, "nsubj"),
        ("reads", "VERB", 0, "root"),
        ("books", "NOUN", 2, "dobj"),
        ("often", "ADV", 2, "advmod"),
        ("quickly", "ADV", 2, "advmod"),
        ("closer", "ADV", 2, "advmod"),
        ("again", "ADV", 2, "advmod"),
        (".", "PUNCT", 2, "punct"),
    ];
    hand_tree(id, &rows)
}

fn contraction(id: &str) -> DepTree {
    let rows: [(&str, &str, usize, &str); 6] = [
        ("she", "PRON", 2, "nsubj"),
        ("sees", "VERB", 0, "root"),
        ("the", "DET", 4, "det"),
        ("house", "NOUN", 2, "dobj"),
        ("of", "ADP", 6, "case"),
        ("Mary", "PROPN", 4, "nmod"),
    ];
    let mut t = hand_tree(id, &rows);
    t.tokens.push(Token::new(7, ".", "PUNCT", 2, "punct"));
    t.tokens[1].deps = "0:root".to_string();
    t.tokens[0].deps = "2:nsubj".to_string();
    t.interleaved.push(galactic::treebank::InterleavedLine {
        position: 4,
        line: "5-6\tofMary\t_\t_\t_\t_\t_\t_\t_\t_".to_string(),
    });
    t
}

fn hand_tree(id: &str, rows: &[(&str, &str, usize, &str)]) -> DepTree {
    let tokens: Vec<Token> = rows
        .iter()
        .enumerate()
        .map(|(i, &(form, tag, head, rel))| Token::new(i + 1, form, tag, head, rel))
        .collect();
    let mut t = DepTree::new(tokens);
    t.comments = vec![format!("# sent_id = {id}")];
    t.source_id = id.to_string();
    t
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/tests/fixtures/treebanks".to_string());
    let sizes = |lang: Lang| match lang {
        Lang::En => [50, 20, 20],
        _ => [300, 40, 40],
    };
    for (seed, lang) in [Lang::En, Lang::Fr, Lang::Hi].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
        let dir = Path::new(&out).join(lang.name());
        fs::create_dir_all(&dir).unwrap();
        for (split, size) in ["train", "dev", "test"].into_iter().zip(sizes(lang)) {
            let mut trees: Vec<DepTree> = (0..size)
                .map(|i| {
                    sentence(
                        lang,
                        &mut rng,
                        &format!("{}-{split}-{:03}", lang.name(), i + 1),
                    )
                })
                .collect();
            if matches!(lang, Lang::En) && split == "train" {
                trees[10] = nonprojective("en-train-011");
                trees[20] = wide("en-train-021");
                trees[30] = contraction("en-train-031");
            }
            for t in &trees {
                t.validate().expect("generated tree is valid");
            }
            let path = dir.join(format!("{}-ud-{split}.conllu", lang.name()));
            fs::write(&path, serialize_conllu(&trees)).unwrap();
            println!("{} ({} sentences)", path.display(), trees.len());
        }
    }
}
