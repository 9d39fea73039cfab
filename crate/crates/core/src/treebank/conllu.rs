//! CoNLL-U reading and writing.

use std::fmt::Write as _;

use super::labels::{is_known_relation, is_known_tag, FALLBACK_RELATION, FALLBACK_TAG};
use super::tree::{DepTree, InterleavedLine, Token, TreeError};

/// How unknown part-of-speech tags and relations are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LabelMode {
    /// Unknown labels are a parse error.
    #[default]
    Strict,
    /// Unknown tags become `X`, unknown relations become `dep`.
    Lenient,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("expected 10 tab-separated columns, found {0}")]
    ColumnCount(usize),
    #[error("invalid token index {0:?}")]
    BadIndex(String),
    #[error("invalid head {0:?}")]
    BadHead(String),
    #[error("unknown part-of-speech tag {0:?}")]
    UnknownTag(String),
    #[error("unknown dependency relation {0:?}")]
    UnknownRelation(String),
    #[error("{0}")]
    Tree(#[from] TreeError),
}

/// A parse failure with the 1-based line number where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

struct Block<'a> {
    first_line: usize,
    lines: Vec<(usize, &'a str)>,
}

fn blocks(text: &str) -> Vec<Block<'_>> {
    let mut out = Vec::new();
    let mut cur: Option<Block> = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            if let Some(b) = cur.take() {
                out.push(b);
            }
            continue;
        }
        cur.get_or_insert_with(|| Block {
            first_line: i + 1,
            lines: Vec::new(),
        })
        .lines
        .push((i + 1, line));
    }
    out.extend(cur);
    out
}

/// Parse every sentence in `text`.
pub fn parse_conllu(text: &str, mode: LabelMode) -> Result<Vec<DepTree>, ParseError> {
    blocks(text)
        .into_iter()
        .enumerate()
        .map(|(ordinal, block)| parse_block(&block, ordinal + 1, mode))
        .collect()
}

fn parse_block(block: &Block<'_>, ordinal: usize, mode: LabelMode) -> Result<DepTree, ParseError> {
    let mut tree = DepTree::new(Vec::new());
    for &(lineno, line) in &block.lines {
        let err = |kind| ParseError { line: lineno, kind };
        if line.starts_with('#') {
            if tree.tokens.is_empty() {
                tree.comments.push(line.to_string());
            } else {
                tree.interleaved.push(InterleavedLine {
                    position: tree.tokens.len(),
                    line: line.to_string(),
                });
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(err(ParseErrorKind::ColumnCount(cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            tree.interleaved.push(InterleavedLine {
                position: tree.tokens.len(),
                line: line.to_string(),
            });
            continue;
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|_| err(ParseErrorKind::BadIndex(cols[0].to_string())))?;
        if index != tree.tokens.len() + 1 {
            return Err(err(ParseErrorKind::BadIndex(cols[0].to_string())));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| err(ParseErrorKind::BadHead(cols[6].to_string())))?;
        let mut upos = cols[3].to_string();
        if !is_known_tag(&upos) {
            match mode {
                LabelMode::Strict => return Err(err(ParseErrorKind::UnknownTag(upos))),
                LabelMode::Lenient => upos = FALLBACK_TAG.to_string(),
            }
        }
        let mut deprel = cols[7].to_string();
        if !is_known_relation(&deprel) {
            match mode {
                LabelMode::Strict => return Err(err(ParseErrorKind::UnknownRelation(deprel))),
                LabelMode::Lenient => deprel = FALLBACK_RELATION.to_string(),
            }
        }
        tree.tokens.push(Token {
            index,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos,
            xpos: cols[4].to_string(),
            feats: cols[5].to_string(),
            head,
            deprel,
            deps: cols[8].to_string(),
            misc: cols[9].to_string(),
        });
    }
    let last_line = block.lines.last().map(|l| l.0).unwrap_or(block.first_line);
    tree.validate().map_err(|e| ParseError {
        line: last_line,
        kind: e.into(),
    })?;
    tree.source_id = tree
        .comments
        .iter()
        .find_map(|c| sent_id(c))
        .unwrap_or_else(|| ordinal.to_string());
    Ok(tree)
}

fn sent_id(comment: &str) -> Option<String> {
    let rest = comment.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix("sent_id")?;
    let rest = rest.trim_start();
    let rest = rest.strip_prefix('=').unwrap_or(rest);
    let id = rest.trim();
    (!id.is_empty()).then(|| id.to_string())
}

/// Write one tree, without the trailing blank separator line.
pub fn write_tree(out: &mut String, tree: &DepTree) {
    for c in &tree.comments {
        out.push_str(c);
        out.push('\n');
    }
    let mut extra = tree.interleaved.iter().peekable();
    for (pos, tok) in tree.tokens.iter().enumerate() {
        while let Some(line) = extra.next_if(|l| l.position <= pos) {
            out.push_str(&line.line);
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            tok.index,
            tok.form,
            tok.lemma,
            tok.upos,
            tok.xpos,
            tok.feats,
            tok.head,
            tok.deprel,
            tok.deps,
            tok.misc
        );
    }
    for line in extra {
        out.push_str(&line.line);
        out.push('\n');
    }
}

/// Serialize trees, each followed by a blank line.
pub fn serialize_conllu(trees: &[DepTree]) -> String {
    let mut out = String::new();
    for tree in trees {
        write_tree(&mut out, tree);
        out.push('\n');
    }
    out
}
