//! Closed label inventories of Universal Dependencies v1.2.

/// The 17 universal part-of-speech tags. `CCONJ` is the v2 spelling of `CONJ`
/// and is accepted as an alias.
pub const UPOS_TAGS: [&str; 17] = [
    "ADJ", "ADP", "ADV", "AUX", "CONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN",
    "PUNCT", "SCONJ", "SYM", "VERB", "X",
];

/// The 40 universal dependency relations.
pub const UNIVERSAL_RELATIONS: [&str; 40] = [
    "acl",
    "advcl",
    "advmod",
    "amod",
    "appos",
    "aux",
    "auxpass",
    "case",
    "cc",
    "ccomp",
    "compound",
    "conj",
    "cop",
    "csubj",
    "csubjpass",
    "dep",
    "det",
    "discourse",
    "dislocated",
    "dobj",
    "expl",
    "foreign",
    "goeswith",
    "iobj",
    "list",
    "mark",
    "mwe",
    "name",
    "neg",
    "nmod",
    "nsubj",
    "nsubjpass",
    "nummod",
    "parataxis",
    "punct",
    "remnant",
    "reparandum",
    "root",
    "vocative",
    "xcomp",
];

/// Tag used for unknown part-of-speech values in lenient mode.
pub const FALLBACK_TAG: &str = "X";
/// Relation used for unknown relations in lenient mode.
pub const FALLBACK_RELATION: &str = "dep";

pub fn is_known_tag(tag: &str) -> bool {
    tag == "CCONJ" || UPOS_TAGS.contains(&tag)
}

/// The part of a relation before any `:` subtype, e.g. `acl` for `acl:relcl`.
pub fn universal_relation(deprel: &str) -> &str {
    match deprel.find(':') {
        Some(pos) => &deprel[..pos],
        None => deprel,
    }
}

pub fn is_known_relation(deprel: &str) -> bool {
    UNIVERSAL_RELATIONS.contains(&universal_relation(deprel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_sizes() {
        assert_eq!(UPOS_TAGS.len(), 17);
        assert_eq!(UNIVERSAL_RELATIONS.len(), 40);
        let mut rels = UNIVERSAL_RELATIONS.to_vec();
        rels.sort_unstable();
        rels.dedup();
        assert_eq!(rels.len(), 40);
    }

    #[test]
    fn subtypes_match_on_prefix() {
        assert_eq!(universal_relation("acl:relcl"), "acl");
        assert_eq!(universal_relation("nsubj"), "nsubj");
        assert!(is_known_relation("acl:rel"));
        assert!(!is_known_relation("blah:acl"));
        assert!(is_known_tag("CCONJ"));
        assert!(!is_known_tag("noun"));
    }
}
