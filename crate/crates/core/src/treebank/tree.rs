use std::fmt;

/// A single syntactic word of a CoNLL-U sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    /// Index of the parent token, 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// A token with every optional column set to `_`.
    pub fn new(index: usize, form: &str, upos: &str, head: usize, deprel: &str) -> Self {
        Token {
            index,
            form: form.to_string(),
            lemma: form.to_lowercase(),
            upos: upos.to_string(),
            xpos: "_".to_string(),
            feats: "_".to_string(),
            head,
            deprel: deprel.to_string(),
            deps: "_".to_string(),
            misc: "_".to_string(),
        }
    }

    /// Value of a `key=value` entry in the MISC column.
    pub fn misc_value(&self, key: &str) -> Option<&str> {
        if self.misc == "_" {
            return None;
        }
        self.misc.split('|').find_map(|item| {
            let (k, v) = item.split_once('=')?;
            (k == key).then_some(v)
        })
    }
}

/// A line that sits between token lines: multiword-token ranges (`3-4`),
/// empty nodes (`3.1`) and comments that follow the first token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterleavedLine {
    /// Number of tokens preceding the line.
    pub position: usize,
    pub line: String,
}

impl InterleavedLine {
    pub fn is_multiword_range(&self) -> bool {
        self.line
            .split('\t')
            .next()
            .map(|id| id.contains('-'))
            .unwrap_or(false)
    }
}

/// One dependency-parsed sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepTree {
    /// Comment lines preceding the first token, verbatim including `#`.
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
    pub interleaved: Vec<InterleavedLine>,
    /// `sent_id` comment value, or the 1-based ordinal of the sentence in its file.
    pub source_id: String,
}

/// Structural defects that keep a token list from being a tree.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("sentence has no root token")]
    NoRoot,
    #[error("sentence has multiple root tokens ({0} and {1})")]
    MultipleRoots(usize, usize),
    #[error("token {0} has head {1} outside the sentence")]
    HeadOutOfRange(usize, usize),
    #[error("token {0} is its own head")]
    SelfLoop(usize),
    #[error("cycle through token {0}")]
    Cycle(usize),
    #[error("token at position {position} has index {index}")]
    BadIndex { position: usize, index: usize },
}

impl DepTree {
    pub fn new(tokens: Vec<Token>) -> Self {
        DepTree {
            comments: Vec::new(),
            tokens,
            interleaved: Vec::new(),
            source_id: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    /// Check the single-root, acyclic, well-indexed tree invariants.
    pub fn validate(&self) -> Result<(), TreeError> {
        let n = self.tokens.len();
        let mut root = None;
        for (pos, tok) in self.tokens.iter().enumerate() {
            if tok.index != pos + 1 {
                return Err(TreeError::BadIndex {
                    position: pos + 1,
                    index: tok.index,
                });
            }
            if tok.head > n {
                return Err(TreeError::HeadOutOfRange(tok.index, tok.head));
            }
            if tok.head == tok.index {
                return Err(TreeError::SelfLoop(tok.index));
            }
            if tok.head == 0 {
                if let Some(r) = root {
                    return Err(TreeError::MultipleRoots(r, tok.index));
                }
                root = Some(tok.index);
            }
        }
        if root.is_none() {
            return Err(TreeError::NoRoot);
        }
        // 0 = unvisited, 1 = on current path, 2 = reaches root
        let mut state = vec![0u8; n + 1];
        state[0] = 2;
        for start in 1..=n {
            let mut path = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                path.push(cur);
                cur = self.tokens[cur - 1].head;
            }
            if state[cur] == 1 {
                return Err(TreeError::Cycle(cur));
            }
            for p in path {
                state[p] = 2;
            }
        }
        Ok(())
    }

    /// Index of the root token.
    pub fn root(&self) -> usize {
        self.tokens
            .iter()
            .find(|t| t.head == 0)
            .map(|t| t.index)
            .expect("validated tree has a root")
    }

    /// Children of every node in surface order; entry 0 lists the root.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.tokens.len() + 1];
        for tok in &self.tokens {
            children[tok.head].push(tok.index);
        }
        children
    }

    /// Fan-out `n` of every token: the token itself plus its dependents.
    pub fn fanouts(&self) -> Vec<usize> {
        let children = self.children();
        (1..=self.tokens.len())
            .map(|i| children[i].len() + 1)
            .collect()
    }

    pub fn max_fanout(&self) -> usize {
        self.fanouts().into_iter().max().unwrap_or(0)
    }

    /// Whether every arc `(h, d)` dominates all tokens strictly between `h` and `d`.
    pub fn is_projective(&self) -> bool {
        let n = self.tokens.len();
        for tok in &self.tokens {
            let (h, d) = (tok.head, tok.index);
            if h == 0 {
                continue;
            }
            let (lo, hi) = if h < d { (h, d) } else { (d, h) };
            for between in lo + 1..hi {
                if !self.dominates(h, between, n) {
                    return false;
                }
            }
        }
        true
    }

    fn dominates(&self, ancestor: usize, mut node: usize, n: usize) -> bool {
        // At most n steps to the root in a valid tree.
        for _ in 0..=n {
            if node == ancestor {
                return true;
            }
            if node == 0 {
                return false;
            }
            node = self.tokens[node - 1].head;
        }
        false
    }
}

impl fmt::Display for DepTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<&str> = self.tokens.iter().map(|t| t.form.as_str()).collect();
        write!(f, "{}", words.join(" "))
    }
}
