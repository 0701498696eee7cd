//! Chart-based recognition with link-counters.

mod chart;
pub(crate) mod compiled;
pub mod rules;

use std::time::{Duration, Instant};

use thiserror::Error;

pub use chart::{CellIndex, Chart, ChartItem, ChartStats, ItemId, Justification, Version};
pub use rules::RuleVariants;

use crate::grammar::Grammar;
use compiled::{Compiled, NONE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecognizeError {
    #[error("grammar is not binarized; run binarize first")]
    NotBinarized,
    #[error("input of {0} tokens is too long (limit 254)")]
    InputTooLong(usize),
    #[error("item budget exhausted after {0} items")]
    ItemBudget(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecognizerOptions {
    /// Drop items whose combined counter norm exceeds `c·n`.
    pub prune: bool,
    /// Record every justification of every item (needed for the forest).
    pub back_pointers: bool,
    /// Abort once the chart holds this many items.
    pub max_items: Option<usize>,
    pub variants: RuleVariants,
}

impl Default for RecognizerOptions {
    fn default() -> Self {
        RecognizerOptions {
            prune: true,
            back_pointers: false,
            max_items: None,
            variants: RuleVariants::default(),
        }
    }
}

impl RecognizerOptions {
    pub fn parsing() -> Self {
        RecognizerOptions {
            back_pointers: true,
            ..Default::default()
        }
    }
}

/// A grammar compiled for recognition. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Recognizer {
    grammar: Grammar,
    pub(crate) compiled: Compiled,
    pub(crate) options: RecognizerOptions,
}

/// A saturated chart together with its verdict.
pub struct Parse<'r> {
    pub chart: Chart<'r>,
    pub accepted: bool,
    /// Tokens that no anchor in the grammar matches.
    pub unknown_tokens: Vec<String>,
    pub elapsed: Duration,
}

impl Recognizer {
    /// The grammar must already be in two-form (see [`crate::grammar::binarize`]).
    pub fn new(grammar: &Grammar, options: RecognizerOptions) -> Result<Self, RecognizeError> {
        if !grammar.is_two_form() {
            return Err(RecognizeError::NotBinarized);
        }
        Ok(Recognizer {
            grammar: grammar.clone(),
            compiled: Compiled::new(grammar),
            options,
        })
    }

    /// Binarize and compile in one step.
    pub fn for_grammar(grammar: &Grammar, options: RecognizerOptions) -> Self {
        let two = crate::grammar::binarize(grammar);
        Recognizer::new(&two, options).expect("binarized grammar is two-form")
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn options(&self) -> RecognizerOptions {
        self.options
    }

    /// Map tokens to terminal ids; unknown tokens get an id no anchor matches.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens
            .iter()
            .map(|t| {
                self.compiled
                    .terminals
                    .get(t.as_ref())
                    .copied()
                    .unwrap_or(NONE)
            })
            .collect()
    }

    pub fn terminal_id(&self, token: &str) -> Option<u32> {
        self.compiled.terminals.get(token).copied()
    }

    /// A fresh, empty chart that can be reused for many inputs.
    pub fn chart(&self) -> Chart<'_> {
        Chart::new(self)
    }

    pub fn recognize<S: AsRef<str>>(&self, tokens: &[S]) -> Result<bool, RecognizeError> {
        let ids = self.encode(tokens);
        self.chart().run(&ids)
    }

    pub fn parse<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Parse<'_>, RecognizeError> {
        let start = Instant::now();
        let ids = self.encode(tokens);
        let unknown_tokens = tokens
            .iter()
            .zip(&ids)
            .filter(|(_, &id)| id == NONE)
            .map(|(t, _)| t.as_ref().to_string())
            .collect();
        let mut chart = self.chart();
        let accepted = chart.run(&ids)?;
        Ok(Parse {
            chart,
            accepted,
            unknown_tokens,
            elapsed: start.elapsed(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::load_grammar;

    fn rec(text: &str) -> Recognizer {
        Recognizer::for_grammar(&load_grammar(text).unwrap(), RecognizerOptions::parsing())
    }

    #[test]
    fn trivial_grammar() {
        let r = rec("set s { tree a initial : (S \"a\") }");
        assert!(r.recognize(&["a"]).unwrap());
        assert!(!r.recognize(&["a", "a"]).unwrap());
        assert!(!r.recognize::<&str>(&[]).unwrap());
        assert!(!r.recognize(&["b"]).unwrap());
    }

    #[test]
    fn rejects_unbinarized_grammar() {
        let g = load_grammar("set s { tree a initial : (S \"a\" \"b\" \"c\") }").unwrap();
        assert_eq!(
            Recognizer::new(&g, RecognizerOptions::default()).unwrap_err(),
            RecognizeError::NotBinarized
        );
    }

    #[test]
    fn substitution_and_epsilon() {
        let r = rec("set s { tree a initial : (S (NP! subst) \"v\") }\nset n { tree n initial : (NP \"x\" (E (eps))) }");
        assert!(r.recognize(&["x", "v"]).unwrap());
        assert!(!r.recognize(&["v"]).unwrap());
    }

    #[test]
    fn adjunction_wraps_the_gap() {
        let r = rec(
            "set i { tree a initial : (S \"a\" (S \"b\")) }\nset j { tree b auxiliary : (S!na \"c\" (S! foot) \"d\") }",
        );
        assert!(r.recognize(&["a", "b"]).unwrap());
        assert!(r.recognize(&["c", "a", "b", "d"]).unwrap());
        assert!(r.recognize(&["a", "c", "b", "d"]).unwrap());
        assert!(r.recognize(&["c", "a", "c", "b", "d", "d"]).unwrap());
        assert!(!r.recognize(&["c", "a", "b"]).unwrap());
    }

    #[test]
    fn chart_is_reusable() {
        let r = rec("set i { tree a initial : (S \"a\") }\nset j { tree b auxiliary : (S \"b\" (S! foot)) }");
        let mut chart = r.chart();
        for (s, want) in [
            (vec!["b", "a"], true),
            (vec!["a", "b"], false),
            (vec!["b", "b", "a"], true),
        ] {
            let ids = r.encode(&s);
            assert_eq!(chart.run(&ids).unwrap(), want, "{s:?}");
        }
    }

    #[test]
    fn saturated_chart_is_a_fixpoint() {
        let r = rec("set i { tree a initial : (S \"a\") }\nset j { tree b auxiliary : (S \"b\" (S! foot)) }");
        let mut p = r.parse(&["b", "b", "a"]).unwrap();
        assert!(p.accepted);
        assert_eq!(p.chart.rescan().unwrap(), 0);
    }

    #[test]
    fn item_budget_is_enforced() {
        let g = load_grammar("set i { tree a initial : (S \"a\") }\nset j { tree b auxiliary : (S \"b\" (S! foot)) }")
            .unwrap();
        let opts = RecognizerOptions {
            max_items: Some(3),
            ..Default::default()
        };
        let r = Recognizer::for_grammar(&g, opts);
        assert!(matches!(
            r.recognize(&["b", "b", "a"]),
            Err(RecognizeError::ItemBudget(_))
        ));
    }
}
