//! Recognition, parsing and tooling for V-TAG: multi-component tree
//! adjoining grammars whose tree sets carry dominance links.

pub mod batch;
pub mod cli;
pub mod forest;
pub mod grammar;
pub mod linkcounter;
pub mod oracle;
pub mod recognizer;
pub mod samples;
