mod common;

use std::collections::BTreeSet;

use galactic::features::{extract, ExtendedSequence, FeatureVector, HFilter};
use galactic::treebank::{LocalConfig, HEAD_RELATION};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_config, worked_subtree};

fn names(fv: &FeatureVector) -> BTreeSet<&str> {
    fv.iter().map(|(k, _)| k.as_str()).collect()
}

#[test]
fn worked_subtree_fires_the_expected_features() {
    let fv = extract(&worked_subtree(), &[0, 1, 2], HFilter::All);
    let expected: BTreeSet<&str> = [
        "L.DET.det",
        "L.DET",
        "L.det",
        "L.ADJ.amod",
        "L.ADJ",
        "L.amod",
        "L.DET.det.ADJ.amod",
        "L.DET.ADJ",
        "L.det.amod",
        "l.DET.det.ADJ.amod",
        "l.DET.ADJ",
        "l.det.amod",
        "A.BOS.BOS.DET.det",
        "A.BOS.DET",
        "A.BOS.det",
        "A.DET.det.ADJ.amod",
        "A.DET.ADJ",
        "A.det.amod",
        "A.ADJ.amod.NOUN.head",
        "A.ADJ.NOUN",
        "A.amod.head",
        "A.NOUN.head.EOS.EOS",
        "A.NOUN.EOS",
        "A.head.EOS",
        "H.BOS.BOS.DET.det.ADJ.amod",
        "H.DET.det.ADJ.amod.NOUN.head",
        "H.ADJ.amod.NOUN.head.EOS.EOS",
        "H.BOS.BOS.DET.det.ADJ.amod.NOUN.head",
        "H.DET.det.ADJ.amod.NOUN.head.EOS.EOS",
        "H.BOS.BOS.DET.det.ADJ.amod.NOUN.head.EOS.EOS",
    ]
    .into_iter()
    .collect();
    assert_eq!(names(&fv), expected);
    assert!(fv.iter().all(|(_, &v)| v == 1.0));
}

#[test]
fn identical_dependents_are_exchangeable() {
    let c = LocalConfig::from_pairs(&[("ADJ", "amod"), ("ADJ", "amod"), ("NOUN", "head")]);
    assert_eq!(
        extract(&c, &[0, 1, 2], HFilter::All),
        extract(&c, &[1, 0, 2], HFilter::All)
    );
}

fn config_and_perm() -> impl Strategy<Value = (LocalConfig, Vec<usize>)> {
    (1usize..=7, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_config(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        (c, perm)
    })
}

/// Full (tag.rel) L/positional/A names have five dot-separated parts after
/// the template letter; their backoffs have two.
fn is_full_pair_feature(name: &str) -> bool {
    let parts: Vec<&str> = name.split('.').collect();
    parts.len() == 5 && ["L", "l", "m", "r", "A"].contains(&parts[0])
}

/// `L.<TAG>.<rel>`; sibling backoffs `L.<TAG>.<TAG>` and `L.<rel>.<rel>` share the arity.
fn is_head_direction_full(name: &str) -> bool {
    let p: Vec<&str> = name.split('.').collect();
    p.len() == 3
        && p[0] == "L"
        && p[1].starts_with(|c: char| c.is_ascii_uppercase())
        && p[2].starts_with(|c: char| c.is_ascii_lowercase())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn head_direction_counts_left_dependents((c, perm) in config_and_perm()) {
        let fv = extract(&c, &perm, HFilter::All);
        let head_at = perm.iter().position(|&k| c.elements[k].relation == HEAD_RELATION).unwrap();
        let full: f64 = fv
            .iter()
            .filter(|(k, _)| is_head_direction_full(k))
            .map(|(_, v)| v)
            .sum();
        prop_assert_eq!(full, head_at as f64);
    }

    #[test]
    fn whitelisting_only_removes_h_features((c, perm) in config_and_perm()) {
        let all = extract(&c, &perm, HFilter::All);
        let fired: BTreeSet<String> = all.iter().map(|(k, _)| k.clone()).filter(|k| k.starts_with("H.")).collect();
        prop_assert_eq!(&extract(&c, &perm, HFilter::Only(&fired)), &all);
        let none = BTreeSet::new();
        let bare = extract(&c, &perm, HFilter::Only(&none));
        prop_assert!(bare.iter().all(|(k, v)| !k.starts_with("H.") && all.get(k) == *v));
        prop_assert_eq!(bare.len() + fired.len(), all.len());
    }

    #[test]
    fn full_features_have_backoff_companions((c, perm) in config_and_perm()) {
        let fv = extract(&c, &perm, HFilter::All);
        for (name, &count) in fv.iter().filter(|(k, _)| is_full_pair_feature(k)) {
            let p: Vec<&str> = name.split('.').collect();
            let tags = format!("{}.{}.{}", p[0], p[1], p[3]);
            let rels = format!("{}.{}.{}", p[0], p[2], p[4]);
            prop_assert!(fv.get(&tags) >= count, "{} lacks {}", name, tags);
            prop_assert!(fv.get(&rels) >= count, "{} lacks {}", name, rels);
        }
    }

    #[test]
    fn extraction_is_pure((c, perm) in config_and_perm()) {
        prop_assert_eq!(extract(&c, &perm, HFilter::All), extract(&c.clone(), &perm.clone(), HFilter::All));
        let seq = ExtendedSequence::new(&c, &perm);
        prop_assert_eq!(seq.n(), c.n());
    }
}
