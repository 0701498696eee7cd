//! Recognition of many inputs at once.
//!
//! With the `parallel` feature (on by default) inputs are spread over the
//! rayon thread pool, one reusable chart per worker. Without it, or through
//! the `*_sequential` functions, a single chart is reused in order.

use std::collections::BTreeSet;

use crate::recognizer::{RecognizeError, Recognizer};

/// Verdict for every input, in input order.
pub fn recognize_all(
    rec: &Recognizer,
    inputs: &[Vec<String>],
) -> Result<Vec<bool>, RecognizeError> {
    let encoded: Vec<Vec<u32>> = inputs.iter().map(|s| rec.encode(s)).collect();
    recognize_encoded(rec, &encoded)
}

pub fn recognize_all_sequential(
    rec: &Recognizer,
    inputs: &[Vec<String>],
) -> Result<Vec<bool>, RecognizeError> {
    let encoded: Vec<Vec<u32>> = inputs.iter().map(|s| rec.encode(s)).collect();
    recognize_encoded_sequential(rec, &encoded)
}

pub fn recognize_encoded_sequential(
    rec: &Recognizer,
    inputs: &[Vec<u32>],
) -> Result<Vec<bool>, RecognizeError> {
    let mut chart = rec.chart();
    inputs.iter().map(|ids| chart.run(ids)).collect()
}

#[cfg(feature = "parallel")]
pub fn recognize_encoded(
    rec: &Recognizer,
    inputs: &[Vec<u32>],
) -> Result<Vec<bool>, RecognizeError> {
    use rayon::prelude::*;
    inputs
        .par_iter()
        .map_init(|| rec.chart(), |chart, ids| chart.run(ids))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn recognize_encoded(
    rec: &Recognizer,
    inputs: &[Vec<u32>],
) -> Result<Vec<bool>, RecognizeError> {
    recognize_encoded_sequential(rec, inputs)
}

/// Every string over `alphabet` of exactly `len` tokens, as alphabet indices,
/// in lexicographic order.
pub fn strings_of_length(alphabet: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if alphabet == 0 && len > 0 {
        0
    } else {
        alphabet.pow(len as u32)
    };
    (0..total).map(move |mut code| {
        let mut s = vec![0; len];
        for slot in s.iter_mut().rev() {
            *slot = code % alphabet;
            code /= alphabet;
        }
        s
    })
}

/// All accepted strings over `alphabet` with at most `max_len` tokens.
///
/// Strings are visited depth-first over their common prefixes, so each
/// prefix's chart is saturated once and shared by all its extensions (see
/// [`crate::recognizer::Chart::push`]). Verdicts are those of
/// [`Recognizer::recognize`] on each string.
pub fn accepted_up_to(
    rec: &Recognizer,
    alphabet: &[String],
    max_len: usize,
) -> Result<BTreeSet<Vec<String>>, RecognizeError> {
    let jobs = sweep_jobs(rec, alphabet, max_len);
    #[cfg(feature = "parallel")]
    let found: Vec<_> = {
        use rayon::prelude::*;
        jobs.par_iter()
            .map_init(|| rec.chart(), |chart, job| job.run(chart))
            .collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let found: Vec<_> = {
        let mut chart = rec.chart();
        jobs.iter()
            .map(|job| job.run(&mut chart))
            .collect::<Result<_, _>>()?
    };
    Ok(collect(alphabet, found))
}

pub fn accepted_up_to_sequential(
    rec: &Recognizer,
    alphabet: &[String],
    max_len: usize,
) -> Result<BTreeSet<Vec<String>>, RecognizeError> {
    let mut chart = rec.chart();
    let found = sweep_jobs(rec, alphabet, max_len)
        .iter()
        .map(|job| job.run(&mut chart))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(collect(alphabet, found))
}

/// One subtree of the prefix trie.
struct SweepJob {
    ids: Vec<u32>,
    first: Option<usize>,
    /// Deepest prefix explored.
    depth: usize,
    /// Only strings of exactly this length are reported; `None` reports all.
    exact: Option<usize>,
    prune_n: usize,
}

fn sweep_jobs(rec: &Recognizer, alphabet: &[String], max_len: usize) -> Vec<SweepJob> {
    let ids = rec.encode(alphabet);
    // The pruning bound depends on the input length unless it is zero for
    // every length, so in general each length gets its own traversal.
    let c = rec.grammar().max_links_per_set();
    let shared = c == 0 || !rec.options().prune;
    let mut jobs = Vec::new();
    let groups: Vec<(usize, Option<usize>)> = if shared {
        vec![(max_len, None)]
    } else {
        (0..=max_len).map(|l| (l, Some(l))).collect()
    };
    for (depth, exact) in groups {
        if exact.is_none_or(|l| l == 0) {
            jobs.push(SweepJob {
                ids: ids.clone(),
                first: None,
                depth: 0,
                exact: Some(0),
                prune_n: depth,
            });
        }
        if depth > 0 {
            for first in 0..alphabet.len() {
                jobs.push(SweepJob {
                    ids: ids.clone(),
                    first: Some(first),
                    depth,
                    exact,
                    prune_n: depth,
                });
            }
        }
    }
    jobs
}

impl SweepJob {
    fn run(
        &self,
        chart: &mut crate::recognizer::Chart<'_>,
    ) -> Result<Vec<Vec<usize>>, RecognizeError> {
        let mut found = Vec::new();
        chart.begin(self.depth, self.prune_n)?;
        let Some(first) = self.first else {
            if chart.accepts() {
                found.push(Vec::new());
            }
            return Ok(found);
        };
        let mut prefix = vec![first];
        let ok = chart.push(self.ids[first])?;
        self.visit(chart, &mut prefix, ok, &mut found)?;
        Ok(found)
    }

    fn visit(
        &self,
        chart: &mut crate::recognizer::Chart<'_>,
        prefix: &mut Vec<usize>,
        accepted: bool,
        found: &mut Vec<Vec<usize>>,
    ) -> Result<(), RecognizeError> {
        if accepted && self.exact.is_none_or(|l| l == prefix.len()) {
            found.push(prefix.clone());
        }
        if prefix.len() == self.depth {
            return Ok(());
        }
        for next in 0..self.ids.len() {
            prefix.push(next);
            let ok = chart.push(self.ids[next])?;
            self.visit(chart, prefix, ok, found)?;
            chart.pop();
            prefix.pop();
        }
        Ok(())
    }
}

fn collect(alphabet: &[String], found: Vec<Vec<Vec<usize>>>) -> BTreeSet<Vec<String>> {
    found
        .into_iter()
        .flatten()
        .map(|s| s.into_iter().map(|i| alphabet[i].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recognizer::RecognizerOptions;
    use crate::samples;

    #[test]
    fn strings_enumerate_in_order() {
        let all: Vec<_> = strings_of_length(2, 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(strings_of_length(3, 0).count(), 1);
        assert_eq!(strings_of_length(0, 2).count(), 0);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let g = samples::load("copy").unwrap();
        let rec = Recognizer::for_grammar(&g, RecognizerOptions::default());
        let alphabet = vec!["a".to_string(), "b".to_string()];
        let a = accepted_up_to(&rec, &alphabet, 6).unwrap();
        let b = accepted_up_to_sequential(&rec, &alphabet, 6).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2 + 4 + 8);
    }

    #[test]
    fn prefix_sharing_matches_per_string_recognition() {
        for name in ["copy", "count4", "count5", "count4_linked", "german"] {
            let g = samples::load(name).unwrap();
            for prune in [true, false] {
                let rec = Recognizer::for_grammar(
                    &g,
                    RecognizerOptions {
                        prune,
                        ..Default::default()
                    },
                );
                let alphabet: Vec<String> = g.terminals().into_iter().take(5).collect();
                let max = if alphabet.len() > 3 { 5 } else { 6 };
                let swept = accepted_up_to_sequential(&rec, &alphabet, max).unwrap();
                let mut direct = BTreeSet::new();
                for len in 0..=max {
                    for s in strings_of_length(alphabet.len(), len) {
                        let toks: Vec<String> = s.iter().map(|&i| alphabet[i].clone()).collect();
                        if rec.recognize(&toks).unwrap() {
                            direct.insert(toks);
                        }
                    }
                }
                assert_eq!(swept, direct, "{name} prune={prune}");
            }
        }
    }
}
