//! Grammars shipped with the crate.

use crate::grammar::{load_grammar, Grammar};

pub const COPY: &str = include_str!("../grammars/copy.vtag");
pub const COUNT4: &str = include_str!("../grammars/count4.vtag");
pub const COUNT4_LINKED: &str = include_str!("../grammars/count4_linked.vtag");
pub const COUNT5: &str = include_str!("../grammars/count5.vtag");
pub const GERMAN: &str = include_str!("../grammars/german.vtag");
pub const AMBIGUOUS: &str = include_str!("../grammars/ambiguous.vtag");

pub const ALL: [(&str, &str); 6] = [
    ("copy", COPY),
    ("count4", COUNT4),
    ("count4_linked", COUNT4_LINKED),
    ("count5", COUNT5),
    ("german", GERMAN),
    ("ambiguous", AMBIGUOUS),
];

/// Word order of the scrambled example sentence.
pub const GERMAN_SENTENCE: [&str; 9] = [
    "dieses",
    "Buch",
    "hat",
    "den",
    "Kindern",
    "bisher-noch",
    "niemand",
    "zu-geben",
    "versucht",
];

/// The same words with the dative placed after the embedded verb, where its
/// foot can no longer dominate the verb phrase it belongs to.
pub const GERMAN_VIOLATION: [&str; 9] = [
    "dieses",
    "Buch",
    "hat",
    "bisher-noch",
    "niemand",
    "zu-geben",
    "den",
    "Kindern",
    "versucht",
];

pub fn load(name: &str) -> Option<Grammar> {
    let text = ALL.iter().find(|(n, _)| *n == name)?.1;
    Some(load_grammar(text).expect("bundled grammars parse"))
}
