use std::sync::OnceLock;

use proptest::prelude::*;

use vtag::batch;
use vtag::grammar::{binarize, load_grammar, render, Grammar, LinkId};
use vtag::linkcounter::LinkCounter;
use vtag::oracle::{accepts, enumerate_language, OracleConfig};
use vtag::recognizer::{Recognizer, RecognizerOptions};
use vtag::samples;

fn count5() -> &'static Grammar {
    static G: OnceLock<Grammar> = OnceLock::new();
    G.get_or_init(|| samples::load("count5").unwrap())
}

fn counter(g: &Grammar) -> impl Strategy<Value = LinkCounter> + '_ {
    prop::collection::vec(0u32..8, g.links().len()).prop_map(move |v| {
        LinkCounter::from_counts(
            g,
            v.into_iter()
                .enumerate()
                .map(|(i, n)| (LinkId(i as u32), n)),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn add_is_associative((a, b, c) in (counter(count5()), counter(count5()), counter(count5()))) {
        prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
    }

    #[test]
    fn monus_by_sum_is_iterated_monus((a, b, c) in (counter(count5()), counter(count5()), counter(count5()))) {
        prop_assert_eq!(a.monus(&b.add(&c).unwrap()).unwrap(), a.monus(&b).unwrap().monus(&c).unwrap());
    }

    #[test]
    fn leq_agrees_with_monus((a, b) in (counter(count5()), counter(count5()))) {
        prop_assert_eq!(a.leq(&b).unwrap(), a.monus(&b).unwrap().is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linked_counting_grammar_agrees_with_oracle(s in prop::collection::vec(0usize..4, 0..=8)) {
        let g = samples::load("count4_linked").unwrap();
        let sigma: Vec<String> = g.terminals().into_iter().collect();
        let tokens: Vec<String> = s.iter().map(|&i| sigma[i].clone()).collect();
        let rec = Recognizer::for_grammar(&g, RecognizerOptions::default());
        let cfg = OracleConfig::new(tokens.len(), tokens.len());
        prop_assert_eq!(rec.recognize(&tokens).unwrap(), accepts(&g, &tokens, &cfg).unwrap());
    }

    #[test]
    fn batch_modes_agree(inputs in prop::collection::vec(prop::collection::vec(0usize..2, 0..=8), 1..20)) {
        let g = samples::load("copy").unwrap();
        let rec = Recognizer::for_grammar(&g, RecognizerOptions::default());
        let strings: Vec<Vec<String>> =
            inputs.iter().map(|s| s.iter().map(|&i| ["a", "b"][i].to_string()).collect()).collect();
        let par = batch::recognize_all(&rec, &strings).unwrap();
        let seq = batch::recognize_all_sequential(&rec, &strings).unwrap();
        prop_assert_eq!(&par, &seq);
        for (s, v) in strings.iter().zip(&par) {
            let half = s.len() / 2;
            let copy = !s.is_empty() && s.len() % 2 == 0 && s[..half] == s[half..];
            prop_assert_eq!(*v, copy, "{:?}", s);
        }
    }
}

#[test]
fn rendering_round_trips() {
    for (name, _) in samples::ALL {
        let g = samples::load(name).unwrap();
        let text = render(&g);
        let again = load_grammar(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
        assert_eq!(render(&again), text, "{name}");
    }
}

#[test]
fn binarization_preserves_the_language() {
    for name in ["count4_linked", "german", "copy"] {
        let g = samples::load(name).unwrap();
        let cfg = OracleConfig::new(4, 8);
        let before = enumerate_language(&g, &cfg).unwrap();
        let after = enumerate_language(&binarize(&g), &cfg).unwrap();
        assert_eq!(
            before.strings.keys().collect::<Vec<_>>(),
            after.strings.keys().collect::<Vec<_>>(),
            "{name}"
        );
    }
}

#[test]
fn oracle_is_monotone_in_bounds() {
    for name in ["copy", "count4_linked"] {
        let g = samples::load(name).unwrap();
        let mut prev = enumerate_language(&g, &OracleConfig::new(0, 8)).unwrap();
        for inst in 1..=4 {
            let next = enumerate_language(&g, &OracleConfig::new(inst, 8)).unwrap();
            assert!(
                prev.strings.keys().all(|s| next.strings.contains_key(s)),
                "{name} at {inst}"
            );
            prev = next;
        }
        assert!(!prev.is_empty());
    }
}

#[test]
fn linked_counting_language_up_to_eight() {
    let g = samples::load("count4_linked").unwrap();
    let sigma: Vec<String> = g.terminals().into_iter().collect();
    for prune in [true, false] {
        let rec = Recognizer::for_grammar(
            &g,
            RecognizerOptions {
                prune,
                ..Default::default()
            },
        );
        let swept = batch::accepted_up_to(&rec, &sigma, 8).unwrap();
        let expected: Vec<Vec<String>> = ["a a b b c c d d", "a b c d"]
            .iter()
            .map(|s| s.split(' ').map(str::to_string).collect())
            .collect();
        assert_eq!(swept.into_iter().collect::<Vec<_>>(), expected);
    }
}
