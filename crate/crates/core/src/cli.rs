//! The `vtag` command line: `check`, `parse`, `oracle` and `bench`.
//!
//! Exit codes: 0 accept or success, 1 reject, 2 error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::forest::{build_forest, replay, verify_links};
use crate::grammar::{binarize, load_grammar, validate, Grammar, GrammarError};
use crate::oracle::{enumerate_language, OracleConfig, OracleError};
use crate::recognizer::{RecognizeError, Recognizer, RecognizerOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "vtag",
    version,
    about = "Recognizer and toolkit for V-TAG grammars with dominance links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a grammar and try binarizing it.
    Check { grammar: PathBuf },
    /// Recognize a whitespace-tokenized sentence.
    Parse {
        grammar: PathBuf,
        /// The sentence; several arguments are joined with spaces.
        #[arg(required = true, num_args = 1..)]
        sentence: Vec<String>,
        /// Dump every chart item.
        #[arg(long)]
        chart: bool,
        /// Print the packed parse forest.
        #[arg(long)]
        forest: bool,
        /// Print up to N derivations.
        #[arg(long, value_name = "N")]
        derivations: Option<usize>,
        /// Disable pruning (for testing).
        #[arg(long)]
        no_prune: bool,
    },
    /// List every string the brute-force enumerator derives within bounds.
    Oracle {
        grammar: PathBuf,
        /// Set instances per derivation, the start tree's included.
        #[arg(long, default_value_t = 3)]
        instances: usize,
        /// Longest string to report.
        #[arg(long, default_value_t = 8)]
        length: usize,
        /// Let a derivation use only part of a set instance.
        #[arg(long)]
        partial_sets: bool,
        /// Abort after this many enumeration steps.
        #[arg(long, default_value_t = 5_000_000)]
        budget: usize,
    },
    /// Time recognition on a family of inputs built from a base string.
    Bench {
        grammar: PathBuf,
        /// Base tokens, whitespace separated.
        #[arg(long)]
        base: String,
        /// Repetition counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        reps: Vec<usize>,
        /// `block` repeats each token in place (`a a b b`), `whole` repeats
        /// the base (`a b a b`).
        #[arg(long, value_enum, default_value_t = Repeat::Block)]
        repeat: Repeat,
        #[arg(long)]
        no_prune: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Repeat {
    Block,
    Whole,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Grammar { path: PathBuf, source: GrammarError },
    #[error("{0} validation error(s)")]
    Invalid(usize),
    #[error(transparent)]
    Recognize(#[from] RecognizeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid input family: {0}")]
    Family(String),
    #[error(transparent)]
    Output(std::io::Error),
}

/// Verdict and counts of one recognition run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunReport {
    pub accepted: bool,
    pub items: usize,
    pub cells: usize,
    pub pruned: u64,
    pub elapsed: Duration,
}

impl std::fmt::Display for RunReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} items={} cells={} pruned={} time={:.3}ms",
            if self.accepted { "accept" } else { "reject" },
            self.items,
            self.cells,
            self.pruned,
            self.elapsed.as_secs_f64() * 1e3
        )
    }
}

/// Run a parsed command line, writing reports to `out` and diagnostics to
/// `err`. Returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Check { grammar } => check(grammar, out, err),
        Command::Parse {
            grammar,
            sentence,
            chart,
            forest,
            derivations,
            no_prune,
        } => {
            let flags = ParseFlags {
                chart: *chart,
                forest: *forest,
                derivations: *derivations,
                prune: !no_prune,
            };
            parse(grammar, &sentence.join(" "), flags, out, err)
        }
        Command::Oracle {
            grammar,
            instances,
            length,
            partial_sets,
            budget,
        } => {
            let cfg = OracleConfig {
                max_set_instances: *instances,
                max_string_length: *length,
                whole_set_semantics: !partial_sets,
                node_budget: *budget,
            };
            oracle(grammar, cfg, out, err)
        }
        Command::Bench {
            grammar,
            base,
            reps,
            repeat,
            no_prune,
        } => bench(grammar, base, reps, *repeat, !no_prune, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn read_grammar(path: &Path) -> Result<Grammar, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    load_grammar(&text).map_err(|source| CliError::Grammar {
        path: path.to_owned(),
        source,
    })
}

/// Load and validate; diagnostics go to `err`.
fn load_valid(path: &Path, err: &mut dyn Write) -> Result<Grammar, CliError> {
    let g = read_grammar(path)?;
    let report = validate(&g);
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    for e in &report.errors {
        let _ = writeln!(err, "error: {e}");
    }
    if report.is_valid() {
        Ok(g)
    } else {
        Err(CliError::Invalid(report.errors.len()))
    }
}

fn check(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let g = load_valid(path, err)?;
    let two = binarize(&g);
    let nodes = |g: &Grammar| g.trees().map(|(_, t)| t.root.walk().count()).sum::<usize>();
    writeln!(
        out,
        "ok: {} sets, {} trees, {} links; {} nodes, {} after binarization",
        g.sets().len(),
        g.trees().count(),
        g.links().len(),
        nodes(&g),
        nodes(&two)
    )
    .map_err(CliError::Output)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy)]
struct ParseFlags {
    chart: bool,
    forest: bool,
    derivations: Option<usize>,
    prune: bool,
}

fn parse(
    path: &Path,
    sentence: &str,
    flags: ParseFlags,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_valid(path, err)?;
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    let mut opts = if flags.chart || flags.forest || flags.derivations.is_some() {
        RecognizerOptions::parsing()
    } else {
        RecognizerOptions::default()
    };
    opts.prune = flags.prune;
    let rec = Recognizer::for_grammar(&g, opts);
    let p = rec.parse(&tokens)?;
    for t in &p.unknown_tokens {
        let _ = writeln!(err, "unknown token `{t}`: no anchor matches it");
    }
    let stats = p.chart.stats();
    let report = RunReport {
        accepted: p.accepted,
        items: stats.items,
        cells: stats.cells,
        pruned: stats.pruned,
        elapsed: p.elapsed,
    };
    let o = |r: std::io::Result<()>| r.map_err(CliError::Output);
    o(writeln!(out, "{report}"))?;
    if flags.chart {
        o(out.write_all(p.chart.dump().as_bytes()))?;
    }
    if flags.forest || flags.derivations.is_some() {
        let forest = build_forest(&p.chart).expect("back pointers are on");
        if flags.forest {
            o(out.write_all(forest.render().as_bytes()))?;
        }
        if let Some(limit) = flags.derivations {
            for (n, d) in forest.enumerate_derivations(&g, limit).iter().enumerate() {
                let links = match replay(d, &g) {
                    Ok(tree) if verify_links(&tree, &g).holds() => "links hold",
                    _ => "links violated",
                };
                o(writeln!(out, "derivation {} ({links})", n + 1))?;
                o(write!(out, "{d}"))?;
            }
        }
    }
    Ok(if p.accepted { EXIT_OK } else { EXIT_REJECT })
}

fn oracle(
    path: &Path,
    cfg: OracleConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_valid(path, err)?;
    let lang = enumerate_language(&g, &cfg)?;
    out.write_all(lang.render().as_bytes())
        .map_err(CliError::Output)?;
    Ok(EXIT_OK)
}

/// Inputs for each repetition count.
pub fn family(base: &[String], reps: usize, repeat: Repeat) -> Vec<String> {
    match repeat {
        Repeat::Block => base
            .iter()
            .flat_map(|t| std::iter::repeat_n(t.clone(), reps))
            .collect(),
        Repeat::Whole => (0..reps).flat_map(|_| base.iter().cloned()).collect(),
    }
}

/// Least-squares slope of `ln y` against `ln x`, over points with both
/// positive.
pub fn growth_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn bench(
    path: &Path,
    base: &str,
    reps: &[usize],
    repeat: Repeat,
    prune: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let base: Vec<String> = base.split_whitespace().map(str::to_string).collect();
    if base.is_empty() {
        return Err(CliError::Family("empty base string".into()));
    }
    if reps.is_empty() {
        return Err(CliError::Family("no repetition counts".into()));
    }
    let g = load_valid(path, err)?;
    let rec = Recognizer::for_grammar(
        &g,
        RecognizerOptions {
            prune,
            ..Default::default()
        },
    );
    if let Some(t) = base.iter().find(|t| rec.terminal_id(t).is_none()) {
        let _ = writeln!(err, "unknown token `{t}`: no anchor matches it");
    }
    let o = |r: std::io::Result<()>| r.map_err(CliError::Output);
    o(writeln!(
        out,
        "reps\tn\tverdict\titems\tcells\tpruned\ttime_ms"
    ))?;
    let mut item_pts = Vec::new();
    let mut time_pts = Vec::new();
    let mut chart = rec.chart();
    for &k in reps {
        let tokens = family(&base, k, repeat);
        let ids = rec.encode(&tokens);
        let start = Instant::now();
        let accepted = chart.run(&ids)?;
        let elapsed = start.elapsed();
        let s = chart.stats();
        let ms = elapsed.as_secs_f64() * 1e3;
        o(writeln!(
            out,
            "{k}\t{}\t{}\t{}\t{}\t{}\t{ms:.3}",
            tokens.len(),
            if accepted { "accept" } else { "reject" },
            s.items,
            s.cells,
            s.pruned
        ))?;
        item_pts.push((tokens.len() as f64, s.items as f64));
        time_pts.push((tokens.len() as f64, ms));
    }
    let fmt = |e: Option<f64>| e.map_or_else(|| "n/a".to_string(), |e| format!("{e:.2}"));
    o(writeln!(
        out,
        "exponent items={} time={}",
        fmt(growth_exponent(&item_pts)),
        fmt(growth_exponent(&time_pts))
    ))?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_shapes() {
        let base = vec!["a".to_string(), "b".to_string()];
        assert_eq!(family(&base, 2, Repeat::Block), ["a", "a", "b", "b"]);
        assert_eq!(family(&base, 2, Repeat::Whole), ["a", "b", "a", "b"]);
        assert!(family(&base, 0, Repeat::Block).is_empty());
    }

    #[test]
    fn exponent_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&x: &f64| (x, 3.0 * x.powi(3)))
            .collect();
        assert!((growth_exponent(&pts).unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(growth_exponent(&[(0.0, 1.0), (2.0, 4.0)]), None);
    }

    #[test]
    fn report_line() {
        let r = RunReport {
            accepted: true,
            items: 4,
            cells: 3,
            pruned: 0,
            elapsed: Duration::from_millis(2),
        };
        assert_eq!(
            r.to_string(),
            "accept items=4 cells=3 pruned=0 time=2.000ms"
        );
    }
}
