//! Synthetic dependency treebanks by reordering the dependents of nouns and
//! verbs under log-linear ordering models learned from real treebanks.

pub mod features;
pub mod langmodel;
pub mod ordering;
pub mod synthesis;
pub mod treebank;
