//! Brute-force language enumeration, used as ground truth on small inputs.
//!
//! Derivation trees are generated directly from the grammar: every
//! adjunction site of every elementary tree either stays empty or receives a
//! derived auxiliary tree, every substitution slot receives a derived initial
//! tree. Each complete derivation is replayed, its uses are grouped into set
//! instances, and the links are checked in the derived tree. Nothing here
//! touches the chart engine.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::rc::Rc;

use thiserror::Error;

use crate::forest::{group_instances, replay, Derivation, OpKind, Operation};
use crate::grammar::{
    validate, DiagnosticKind, Grammar, NodeAddress, NodeKind, TreeKind, TreeNode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Set instances per derivation, the start tree's instance included.
    pub max_set_instances: usize,
    pub max_string_length: usize,
    /// Every tree of a used set instance must be attached.
    pub whole_set_semantics: bool,
    /// Abort after generating this many derivation nodes.
    pub node_budget: usize,
}

impl OracleConfig {
    pub fn new(max_set_instances: usize, max_string_length: usize) -> Self {
        OracleConfig {
            max_set_instances,
            max_string_length,
            whole_set_semantics: true,
            node_budget: 5_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("node budget of {0} exhausted; lower the bounds")]
    Budget(usize),
    #[error("bounds too small for {len} tokens: need at least {len} instances and length {len}")]
    InsufficientBounds { len: usize },
    #[error("grammar is not lexicalized ({0}); no finite bound applies")]
    NotLexicalized(String),
}

/// Accepted strings with their number of derivations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Language {
    pub strings: BTreeMap<Vec<String>, u64>,
}

impl Language {
    pub fn contains<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        let key: Vec<String> = tokens.iter().map(|t| t.as_ref().to_string()).collect();
        self.strings.contains_key(&key)
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    /// One line per string, `"<tokens>"\t<count>`, sorted.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (s, n) in &self.strings {
            let _ = writeln!(out, "\"{}\"\t{}", s.join(" "), n);
        }
        out
    }
}

#[derive(Debug)]
struct DNode {
    tree: usize,
    tokens: usize,
    uses: usize,
    attached: Vec<Option<Rc<DNode>>>,
}

#[derive(Debug, Clone)]
struct Site {
    address: NodeAddress,
    slot: bool,
    obligatory: bool,
    candidates: Vec<usize>,
}

struct TreeInfo {
    id: String,
    anchors: usize,
    sites: Vec<Site>,
}

/// Derivation trees keyed by `(tree, tokens, uses)`.
type Memo = HashMap<(usize, usize, usize), Rc<Vec<Rc<DNode>>>>;

struct Enumerator {
    trees: Vec<TreeInfo>,
    memo: Memo,
    produced: usize,
    budget: usize,
}

impl Enumerator {
    fn new(grammar: &Grammar, budget: usize, allowed: &dyn Fn(&TreeNode) -> bool) -> Self {
        let all: Vec<_> = grammar.trees().map(|(_, t)| t).collect();
        let mut trees = Vec::new();
        for t in &all {
            let anchors = t.root.walk().filter(|n| n.kind == NodeKind::Anchor).count();
            let mut sites = Vec::new();
            for node in t.root.walk() {
                let slot = node.kind == NodeKind::SubstSlot;
                let adjoinable = node.kind == NodeKind::Internal && !node.constraint.is_null();
                if !slot && !adjoinable {
                    continue;
                }
                let candidates = all
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.root.label.name == node.label.name && allowed(&c.root))
                    .filter(|(_, c)| {
                        if slot {
                            c.kind == TreeKind::Initial
                        } else {
                            c.kind == TreeKind::Auxiliary && node.constraint.admits(&c.id)
                        }
                    })
                    .map(|(i, _)| i)
                    .collect();
                sites.push(Site {
                    address: node.address.clone(),
                    slot,
                    obligatory: node.constraint.is_obligatory(),
                    candidates,
                });
            }
            trees.push(TreeInfo {
                id: t.id.clone(),
                anchors,
                sites,
            });
        }
        Enumerator {
            trees,
            memo: HashMap::new(),
            produced: 0,
            budget,
        }
    }

    /// Every derivation rooted in `tree` with at most `tokens` anchors and
    /// `uses` elementary trees.
    fn generate(
        &mut self,
        tree: usize,
        tokens: usize,
        uses: usize,
    ) -> Result<Rc<Vec<Rc<DNode>>>, OracleError> {
        if let Some(v) = self.memo.get(&(tree, tokens, uses)) {
            return Ok(v.clone());
        }
        let mut out = Vec::new();
        let own = self.trees[tree].anchors;
        if uses >= 1 && own <= tokens {
            let mut partial = Vec::new();
            self.fill(tree, 0, tokens - own, uses - 1, &mut partial, &mut out)?;
        }
        let out = Rc::new(out);
        self.memo.insert((tree, tokens, uses), out.clone());
        Ok(out)
    }

    fn fill(
        &mut self,
        tree: usize,
        site: usize,
        tokens: usize,
        uses: usize,
        partial: &mut Vec<Option<Rc<DNode>>>,
        out: &mut Vec<Rc<DNode>>,
    ) -> Result<(), OracleError> {
        if site == self.trees[tree].sites.len() {
            let used_tokens: usize = partial.iter().flatten().map(|d| d.tokens).sum();
            let used_uses: usize = partial.iter().flatten().map(|d| d.uses).sum();
            self.produced += 1;
            if self.produced > self.budget {
                return Err(OracleError::Budget(self.budget));
            }
            out.push(Rc::new(DNode {
                tree,
                tokens: self.trees[tree].anchors + used_tokens,
                uses: 1 + used_uses,
                attached: partial.clone(),
            }));
            return Ok(());
        }
        let s = self.trees[tree].sites[site].clone();
        if !s.slot && !s.obligatory {
            partial.push(None);
            self.fill(tree, site + 1, tokens, uses, partial, out)?;
            partial.pop();
        }
        for &cand in &s.candidates {
            let options = self.generate(cand, tokens, uses)?;
            for d in options.iter() {
                partial.push(Some(d.clone()));
                self.fill(
                    tree,
                    site + 1,
                    tokens - d.tokens,
                    uses - d.uses,
                    partial,
                    out,
                )?;
                partial.pop();
            }
        }
        Ok(())
    }

    fn operations(&self, root: &DNode) -> Vec<Operation> {
        let mut ops = vec![Operation {
            kind: OpKind::Start,
            tree: self.trees[root.tree].id.clone(),
            host: None,
        }];
        self.collect(root, 0, &mut ops);
        ops
    }

    fn collect(&self, node: &DNode, me: usize, ops: &mut Vec<Operation>) {
        for (site, child) in self.trees[node.tree].sites.iter().zip(&node.attached) {
            let Some(child) = child else { continue };
            let u = ops.len();
            ops.push(Operation {
                kind: if site.slot {
                    OpKind::Substitute
                } else {
                    OpKind::Adjoin
                },
                tree: self.trees[child.tree].id.clone(),
                host: Some((me, site.address.clone())),
            });
            self.collect(child, u, ops);
        }
    }
}

/// All strings up to the length bound, with their derivation counts.
/// Counts are of derivation trees, which fixes one attachment order per
/// derived structure.
pub fn enumerate_language(
    grammar: &Grammar,
    config: &OracleConfig,
) -> Result<Language, OracleError> {
    enumerate_filtered(grammar, config, &|_| true)
}

fn enumerate_filtered(
    grammar: &Grammar,
    config: &OracleConfig,
    allowed: &dyn Fn(&TreeNode) -> bool,
) -> Result<Language, OracleError> {
    let mut lang = Language::default();
    if config.max_set_instances == 0 {
        return Ok(lang);
    }
    let max_set = grammar
        .sets()
        .iter()
        .map(|s| s.trees.len())
        .max()
        .unwrap_or(0);
    let max_uses = config.max_set_instances * max_set;
    let mut en = Enumerator::new(grammar, config.node_budget, allowed);
    let starts: Vec<usize> = grammar
        .trees()
        .enumerate()
        .filter(|(_, (_, t))| {
            t.kind == TreeKind::Initial
                && grammar.start_labels().contains(&t.root.label.name)
                && allowed(&t.root)
        })
        .map(|(i, _)| i)
        .collect();
    for s in starts {
        let all = en.generate(s, config.max_string_length, max_uses)?;
        for d in all.iter() {
            let ops = en.operations(d);
            let derivation = Derivation::ungrouped(ops);
            let Ok(tree) = replay(&derivation, grammar) else {
                continue;
            };
            let Some(instances) = group_instances(&tree, grammar, config.whole_set_semantics)
            else {
                continue;
            };
            let count = instances.iter().max().map_or(0, |m| m + 1);
            if count > config.max_set_instances {
                continue;
            }
            *lang.strings.entry(tree.frontier()).or_insert(0) += 1;
        }
    }
    Ok(lang)
}

/// Membership by enumeration. The bounds must cover the input: a
/// lexicalized grammar needs no more instances than tokens.
pub fn accepts<S: AsRef<str>>(
    grammar: &Grammar,
    tokens: &[S],
    config: &OracleConfig,
) -> Result<bool, OracleError> {
    let len = tokens.len();
    if config.max_set_instances < len || config.max_string_length < len {
        return Err(OracleError::InsufficientBounds { len });
    }
    if let Some(d) = validate(grammar)
        .errors
        .iter()
        .find(|d| d.kind == DiagnosticKind::NotLexicalized)
    {
        return Err(OracleError::NotLexicalized(d.message.clone()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in tokens {
        *counts.entry(t.as_ref()).or_insert(0) += 1;
    }
    // trees anchoring words absent from the input can never contribute
    let allowed = |root: &TreeNode| {
        let mut need: HashMap<&str, usize> = HashMap::new();
        for n in root.walk().filter(|n| n.kind == NodeKind::Anchor) {
            *need.entry(n.label.name.as_str()).or_insert(0) += 1;
        }
        need.iter()
            .all(|(w, k)| counts.get(w).is_some_and(|have| have >= k))
    };
    let cfg = OracleConfig {
        max_string_length: len,
        ..*config
    };
    Ok(enumerate_filtered(grammar, &cfg, &allowed)?.contains(tokens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::load_grammar;
    use crate::samples;

    #[test]
    fn single_tree() {
        let g = load_grammar("set s { tree a initial : (S \"a\") }").unwrap();
        let lang = enumerate_language(&g, &OracleConfig::new(1, 5)).unwrap();
        assert_eq!(lang.render(), "\"a\"\t1\n");
        assert!(enumerate_language(&g, &OracleConfig::new(0, 5))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn copy_language_up_to_eight() {
        let g = samples::load("copy").unwrap();
        let lang = enumerate_language(&g, &OracleConfig::new(4, 8)).unwrap();
        // 2 + 4 + 8 + 16 strings of length 2, 4, 6, 8
        assert_eq!(lang.len(), 30);
        for (s, n) in &lang.strings {
            let h = s.len() / 2;
            assert_eq!(s[..h], s[h..]);
            assert_eq!(*n, 1);
        }
    }

    #[test]
    fn instance_bound_counts_the_start_tree() {
        let g = samples::load("copy").unwrap();
        let lang = enumerate_language(&g, &OracleConfig::new(3, 8)).unwrap();
        assert_eq!(lang.strings.keys().map(Vec::len).max(), Some(6));
    }

    #[test]
    fn bounds_are_checked() {
        let g = samples::load("copy").unwrap();
        assert_eq!(
            accepts(&g, &["a", "a"], &OracleConfig::new(1, 2)),
            Err(OracleError::InsufficientBounds { len: 2 })
        );
        assert!(accepts(&g, &["a", "b", "a", "b"], &OracleConfig::new(4, 4)).unwrap());
        assert!(!accepts(&g, &["a", "b", "b", "a"], &OracleConfig::new(4, 4)).unwrap());
    }

    #[test]
    fn refuses_unlexicalized_grammar() {
        let g = load_grammar("set s { tree a initial : (S (eps)) }").unwrap();
        assert!(matches!(
            accepts(&g, &["x"], &OracleConfig::new(1, 1)),
            Err(OracleError::NotLexicalized(_))
        ));
    }

    #[test]
    fn empty_grammar_accepts_nothing() {
        let g = load_grammar("").unwrap();
        assert!(!accepts(&g, &["a"], &OracleConfig::new(1, 1)).unwrap());
        assert!(!accepts::<&str>(&g, &[], &OracleConfig::new(0, 0)).unwrap());
    }

    #[test]
    fn budget_guard_trips() {
        let g = samples::load("ambiguous").unwrap();
        let cfg = OracleConfig {
            node_budget: 50,
            ..OracleConfig::new(10, 10)
        };
        assert_eq!(enumerate_language(&g, &cfg), Err(OracleError::Budget(50)));
    }

    #[test]
    fn german_links_filter_word_orders() {
        let g = samples::load("german").unwrap();
        let cfg = OracleConfig::new(9, 9);
        assert!(accepts(&g, &samples::GERMAN_SENTENCE, &cfg).unwrap());
        assert!(!accepts(&g, &samples::GERMAN_VIOLATION, &cfg).unwrap());
        // without the links the violating order is derivable
        let loose = OracleConfig {
            whole_set_semantics: false,
            ..cfg
        };
        let unlinked = load_grammar(&samples::GERMAN.replace("link ", "# link ")).unwrap();
        assert!(accepts(&unlinked, &samples::GERMAN_VIOLATION, &loose).unwrap());
    }
}
