use std::fmt;
use std::str::FromStr;

use super::tree::DepTree;

/// Relation label given to the head inside its own configuration.
pub const HEAD_RELATION: &str = "head";

/// The two head classes whose dependents get reordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosClass {
    /// NOUN, PROPN and PRON heads.
    N,
    /// VERB heads.
    V,
}

impl PosClass {
    pub const ALL: [PosClass; 2] = [PosClass::N, PosClass::V];

    pub fn contains(self, upos: &str) -> bool {
        match self {
            PosClass::N => matches!(upos, "NOUN" | "PROPN" | "PRON"),
            PosClass::V => upos == "VERB",
        }
    }

    pub fn of(upos: &str) -> Option<PosClass> {
        PosClass::ALL.into_iter().find(|c| c.contains(upos))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PosClass::N => "N",
            PosClass::V => "V",
        }
    }
}

impl fmt::Display for PosClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N" => Ok(PosClass::N),
            "V" => Ok(PosClass::V),
            other => Err(format!("unknown POS class {other:?} (expected N or V)")),
        }
    }
}

/// One member of a local configuration: the head or one of its dependents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Element {
    pub tag: String,
    /// Relation to the head as written in the treebank, or `head`.
    pub relation: String,
    /// 1-based token index in the source tree; 0 for synthetic configurations.
    pub token: usize,
}

impl Element {
    pub fn new(tag: &str, relation: &str) -> Self {
        Element {
            tag: tag.to_string(),
            relation: relation.to_string(),
            token: 0,
        }
    }

    pub fn is_head(&self) -> bool {
        self.relation == HEAD_RELATION
    }
}

/// A head together with its dependents, in the order they are observed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalConfig {
    pub head_tag: String,
    pub head_relation_to_parent: String,
    pub elements: Vec<Element>,
    pub tree_id: String,
    pub head_token: usize,
}

impl LocalConfig {
    /// Build a configuration from `(tag, relation)` pairs; exactly one must be `head`.
    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        let elements: Vec<Element> = pairs.iter().map(|&(t, r)| Element::new(t, r)).collect();
        let head = elements
            .iter()
            .find(|e| e.is_head())
            .expect("configuration needs a head element");
        LocalConfig {
            head_tag: head.tag.clone(),
            head_relation_to_parent: String::new(),
            elements,
            tree_id: String::new(),
            head_token: 0,
        }
    }

    /// Number of elements, the head included.
    pub fn n(&self) -> usize {
        self.elements.len()
    }

    /// Position of the head among the elements.
    pub fn head_position(&self) -> usize {
        self.elements
            .iter()
            .position(Element::is_head)
            .expect("configuration has a head element")
    }

    /// The same configuration with elements rearranged so that
    /// `order[k]` is placed at position `k`.
    pub fn reordered(&self, order: &[usize]) -> LocalConfig {
        LocalConfig {
            elements: order.iter().map(|&i| self.elements[i].clone()).collect(),
            ..self.clone()
        }
    }
}

/// Configuration of the token at `index` regardless of its class.
pub fn local_config_at(tree: &DepTree, children: &[Vec<usize>], index: usize) -> LocalConfig {
    let head = tree.token(index);
    let mut members: Vec<usize> = children[index].clone();
    members.push(index);
    members.sort_unstable();
    let elements = members
        .into_iter()
        .map(|i| {
            let tok = tree.token(i);
            Element {
                tag: tok.upos.clone(),
                relation: if i == index {
                    HEAD_RELATION.to_string()
                } else {
                    tok.deprel.clone()
                },
                token: i,
            }
        })
        .collect();
    LocalConfig {
        head_tag: head.upos.clone(),
        head_relation_to_parent: head.deprel.clone(),
        elements,
        tree_id: tree.source_id.clone(),
        head_token: index,
    }
}

/// Configurations of every head in `class`, in surface order of the heads.
pub fn local_configs(tree: &DepTree, class: PosClass) -> Vec<LocalConfig> {
    let children = tree.children();
    tree.tokens
        .iter()
        .filter(|t| class.contains(&t.upos))
        .map(|t| local_config_at(tree, &children, t.index))
        .collect()
}

/// Number of tokens that are N/V heads or dependents of one.
pub fn touched_tokens(tree: &DepTree) -> usize {
    tree.tokens
        .iter()
        .filter(|t| {
            PosClass::of(&t.upos).is_some()
                || (t.head > 0 && PosClass::of(&tree.token(t.head).upos).is_some())
        })
        .count()
}
