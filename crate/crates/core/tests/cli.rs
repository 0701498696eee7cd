use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::NamedTempFile;

fn vtag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vtag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("grammars")
        .join(format!("{name}.vtag"))
}

fn grammar_file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn path(f: &NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_accepts_the_german_grammar() {
    let o = vtag(&["check", bundled("german").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ok:"));
}

#[test]
fn check_rejects_a_link_from_a_non_foot() {
    let f = grammar_file(
        "set s { tree a initial : (S \"a\" (T \"t\"))\n tree b auxiliary : (T \"b\" (T! foot))\n link a@1 -> b@0 }",
    );
    let o = vtag(&["check", path(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not a foot"), "{}", stderr(&o));
}

#[test]
fn check_rejects_an_unlexicalized_set() {
    let f = grammar_file("set s { tree a initial : (S (eps)) }");
    let o = vtag(&["check", path(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn check_reports_a_missing_file() {
    let o = vtag(&["check", "/nonexistent/grammar.vtag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn parse_exit_codes_follow_the_verdict() {
    let g = bundled("german");
    let g = g.to_str().unwrap();
    let sentence = vtag::samples::GERMAN_SENTENCE.join(" ");
    let o = vtag(&["parse", g, &sentence]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("accept "));
    let violation = vtag::samples::GERMAN_VIOLATION.join(" ");
    let o = vtag(&["parse", g, &violation]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("reject "));
}

#[test]
fn parse_accepts_tokens_as_separate_arguments() {
    let g = bundled("copy");
    let o = vtag(&["parse", g.to_str().unwrap(), "a", "b", "a", "b"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unknown_token_rejects_with_a_diagnostic() {
    let f = grammar_file("set s { tree a initial : (S \"a\") }");
    let o = vtag(&["parse", path(&f), "a z"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown token `z`"));
}

#[test]
fn chart_dump_of_a_one_token_accept() {
    let f = grammar_file("set s { tree a initial : (S \"a\") }");
    let o = vtag(&["parse", path(&f), "a", "--chart"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let dump: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(dump.len(), 3, "{out}");
    assert!(dump.iter().all(|l| l.starts_with("0\t1\t1\t1\t")));
    assert!(
        dump.iter()
            .any(|l| l.contains("s/a@1\tT") && l.ends_with("init")),
        "{out}"
    );
    assert!(
        dump.iter()
            .any(|l| l.contains("s/a@0\tB") && l.contains("case4")),
        "{out}"
    );
    assert!(
        dump.iter()
            .any(|l| l.contains("s/a@0\tT") && l.contains("case6")),
        "{out}"
    );
}

#[test]
fn derivations_are_listed() {
    let g = bundled("german");
    let sentence = vtag::samples::GERMAN_SENTENCE.join(" ");
    let o = vtag(&[
        "parse",
        g.to_str().unwrap(),
        &sentence,
        "--derivations",
        "5",
        "--forest",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("derivation 1 (links hold)"), "{out}");
    assert!(out.contains("adjoin b_dat@0 at b_subj@"), "{out}");
}

#[test]
fn no_prune_keeps_the_verdict() {
    let g = bundled("count5");
    let g = g.to_str().unwrap();
    for s in ["a b c d e", "a a b b c c d d e e", "a b b c d e"] {
        let on = vtag(&["parse", g, s]).status.code();
        let off = vtag(&["parse", g, s, "--no-prune"]).status.code();
        assert_eq!(on, off, "{s}");
    }
}

#[test]
fn oracle_lists_a_single_tree_language() {
    let f = grammar_file("set s { tree a initial : (S \"a\") }");
    let o = vtag(&["oracle", path(&f), "--instances", "1", "--length", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "\"a\"\t1\n");
}

#[test]
fn oracle_with_zero_bound_is_empty() {
    let o = vtag(&[
        "oracle",
        bundled("copy").to_str().unwrap(),
        "--instances",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
}

#[test]
fn oracle_matches_the_golden_file() {
    let o = vtag(&[
        "oracle",
        bundled("copy").to_str().unwrap(),
        "--instances",
        "3",
        "--length",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), include_str!("golden/copy_3_8.txt"));
}

#[test]
fn oracle_budget_abort_is_an_error() {
    let o = vtag(&[
        "oracle",
        bundled("copy").to_str().unwrap(),
        "--instances",
        "6",
        "--length",
        "12",
        "--budget",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget"));
}

#[test]
fn bench_prints_a_table_and_exponent() {
    let o = vtag(&[
        "bench",
        bundled("copy").to_str().unwrap(),
        "--base",
        "a",
        "--reps",
        "0,4,8,16",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 6, "{out}");
    assert!(lines[0].starts_with("reps\tn\t"));
    assert!(lines[5].starts_with("exponent items="));
    let items = |l: &str| l.split('\t').nth(3).unwrap().parse::<f64>().unwrap();
    // doubling n stays far inside the polynomial envelope
    for w in lines[2..5].windows(2) {
        assert!(items(w[1]) / items(w[0]) <= 64.0, "{out}");
    }
}

#[test]
fn bench_rejects_an_empty_family() {
    let o = vtag(&["bench", bundled("copy").to_str().unwrap(), "--base", " "]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid input family"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(vtag(&["parse"]).status.code(), Some(2));
    assert_eq!(vtag(&["frobnicate"]).status.code(), Some(2));
}
