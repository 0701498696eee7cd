//! Packed parse forests built from chart back pointers, and derivation
//! extraction.

mod derivation;

use std::collections::{HashMap, HashSet};
use std::fmt::Write;
use std::rc::Rc;

use thiserror::Error;

pub use derivation::{
    group_instances, replay, verify_links, Derivation, DerivedNode, DerivedTree, LinkReport,
    LinkViolation, OpKind, Operation, ReplayError, UseInfo,
};

use crate::grammar::{Grammar, NodeKind};
use crate::recognizer::{CellIndex, Chart, ChartItem, ItemId, Justification};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("chart was built without back pointers")]
    NoBackPointers,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub justification: Justification,
    /// Forest node indices of the antecedents, in justification order.
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestNode {
    pub item_id: ItemId,
    pub cell: CellIndex,
    pub item: ChartItem,
    pub alternatives: Vec<Alternative>,
}

/// Shared representation of every derivation of an accepted input.
#[derive(Debug, Clone, Default)]
pub struct Forest {
    pub nodes: Vec<ForestNode>,
    pub roots: Vec<usize>,
}

type Unfolded = (Rc<Vec<Rc<ProofTree>>>, bool);

/// One unfolding of the forest: an alternative chosen at every node.
#[derive(Debug)]
pub struct ProofTree {
    pub node: usize,
    pub alternative: usize,
    pub children: Vec<Rc<ProofTree>>,
}

pub fn build_forest(chart: &Chart<'_>) -> Result<Forest, ForestError> {
    let accepting = chart.accepting_items();
    if chart.item_count() > 0 && chart.justifications(0).is_empty() {
        return Err(ForestError::NoBackPointers);
    }
    let mut forest = Forest::default();
    let mut index: HashMap<ItemId, usize> = HashMap::new();
    let mut stack: Vec<ItemId> = Vec::new();
    for &id in &accepting {
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(id) {
            e.insert(forest.nodes.len());
            forest.nodes.push(ForestNode {
                item_id: id,
                cell: chart.cell(id),
                item: chart.item(id),
                alternatives: vec![],
            });
            stack.push(id);
        }
    }
    while let Some(id) = stack.pop() {
        let me = index[&id];
        let mut alts = Vec::new();
        for just in chart.justifications(id) {
            let mut children = Vec::new();
            for a in just.antecedents() {
                let next = forest.nodes.len();
                let slot = *index.entry(a).or_insert(next);
                if slot == next {
                    forest.nodes.push(ForestNode {
                        item_id: a,
                        cell: chart.cell(a),
                        item: chart.item(a),
                        alternatives: vec![],
                    });
                    stack.push(a);
                }
                children.push(slot);
            }
            alts.push(Alternative {
                justification: *just,
                children,
            });
        }
        forest.nodes[me].alternatives = alts;
    }
    forest.roots = accepting.iter().map(|id| index[id]).collect();
    Ok(forest)
}

impl Forest {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Number of unfoldings, saturating at `u128::MAX`. An alternative that
    /// leads back into a node being expanded contributes nothing, so cyclic
    /// justifications never count infinitely often.
    pub fn count_derivations(&self) -> u128 {
        let mut memo: Vec<Option<u128>> = vec![None; self.nodes.len()];
        let mut on_stack = vec![false; self.nodes.len()];
        self.roots.iter().fold(0u128, |acc, &r| {
            acc.saturating_add(self.count(r, &mut memo, &mut on_stack))
        })
    }

    fn count(&self, n: usize, memo: &mut [Option<u128>], on_stack: &mut [bool]) -> u128 {
        if let Some(c) = memo[n] {
            return c;
        }
        if on_stack[n] {
            return 0;
        }
        on_stack[n] = true;
        let mut total: u128 = 0;
        for alt in &self.nodes[n].alternatives {
            let mut prod: u128 = 1;
            for &c in &alt.children {
                prod = prod.saturating_mul(self.count(c, memo, on_stack));
                if prod == 0 {
                    break;
                }
            }
            total = total.saturating_add(prod);
        }
        on_stack[n] = false;
        memo[n] = Some(total);
        total
    }

    /// The first `limit` unfoldings in lexicographic order of alternative
    /// indices (roots first, then each node's children left to right).
    pub fn proof_trees(&self, limit: usize) -> Vec<Rc<ProofTree>> {
        let mut memo: HashMap<usize, Unfolded> = HashMap::new();
        let mut on_stack = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        for &r in &self.roots {
            if out.len() >= limit {
                break;
            }
            let got = self.unfold(r, limit - out.len(), &mut memo, &mut on_stack);
            out.extend(got.iter().cloned());
        }
        out.truncate(limit);
        out
    }

    fn unfold(
        &self,
        n: usize,
        limit: usize,
        memo: &mut HashMap<usize, Unfolded>,
        on_stack: &mut [bool],
    ) -> Rc<Vec<Rc<ProofTree>>> {
        if let Some((v, complete)) = memo.get(&n) {
            if *complete || v.len() >= limit {
                return v.clone();
            }
        }
        if on_stack[n] || limit == 0 {
            return Rc::new(Vec::new());
        }
        on_stack[n] = true;
        let mut out: Vec<Rc<ProofTree>> = Vec::new();
        let mut complete = true;
        for (ai, alt) in self.nodes[n].alternatives.iter().enumerate() {
            if out.len() >= limit {
                complete = false;
                break;
            }
            let want = limit - out.len();
            let lists: Vec<Rc<Vec<Rc<ProofTree>>>> = alt
                .children
                .iter()
                .map(|&c| self.unfold(c, want, memo, on_stack))
                .collect();
            if lists.iter().any(|l| l.is_empty()) {
                continue;
            }
            // a child list cut at `want` may hide further combinations
            let child_cut = lists.iter().any(|l| l.len() >= want);
            // odometer over the children's lists, first child slowest
            let mut idx = vec![0usize; lists.len()];
            loop {
                out.push(Rc::new(ProofTree {
                    node: n,
                    alternative: ai,
                    children: idx.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect(),
                }));
                if out.len() >= limit {
                    break;
                }
                let mut pos = lists.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < lists[pos].len() {
                        break;
                    }
                    idx[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX || lists.is_empty() {
                    break;
                }
            }
            if child_cut || out.len() >= limit {
                complete = false;
            }
        }
        on_stack[n] = false;
        let out = Rc::new(out);
        memo.insert(n, (out.clone(), complete));
        out
    }

    /// Derivation operations of one unfolding, each use its own instance.
    pub fn operations(&self, proof: &ProofTree) -> Vec<Operation> {
        let root = &self.nodes[proof.node].item.node;
        let mut ops = vec![Operation {
            kind: OpKind::Start,
            tree: root.tree.clone(),
            host: None,
        }];
        self.collect(proof, 0, &mut ops);
        ops
    }

    fn collect(&self, p: &ProofTree, cur: usize, ops: &mut Vec<Operation>) {
        let node = &self.nodes[p.node];
        let alt = &node.alternatives[p.alternative];
        match alt.justification {
            Justification::Case5a { .. } | Justification::Case5b { .. } => {
                let aux = &p.children[1];
                let u = ops.len();
                ops.push(Operation {
                    kind: OpKind::Adjoin,
                    tree: self.nodes[aux.node].item.node.tree.clone(),
                    host: Some((cur, node.item.node.clone())),
                });
                self.collect(&p.children[0], cur, ops);
                self.collect(aux, u, ops);
            }
            Justification::Subst { .. } => {
                let root = &p.children[0];
                let u = ops.len();
                ops.push(Operation {
                    kind: OpKind::Substitute,
                    tree: self.nodes[root.node].item.node.tree.clone(),
                    host: Some((cur, node.item.node.clone())),
                });
                self.collect(root, u, ops);
            }
            _ => {
                for c in &p.children {
                    self.collect(c, cur, ops);
                }
            }
        }
    }

    /// Up to `limit` distinct derivations, each replayed against `grammar`
    /// and grouped into set instances. Unfoldings whose uses admit no
    /// link-respecting grouping are skipped; see [`Forest::derivations_checked`].
    pub fn enumerate_derivations(&self, grammar: &Grammar, limit: usize) -> Vec<Derivation> {
        self.derivations_checked(grammar, limit)
            .into_iter()
            .filter_map(|(d, ok)| ok.then_some(d))
            .collect()
    }

    /// Like [`Forest::enumerate_derivations`] but keeps derivations whose
    /// grouping failed, flagged `false`.
    pub fn derivations_checked(&self, grammar: &Grammar, limit: usize) -> Vec<(Derivation, bool)> {
        let mut seen: HashSet<Vec<Operation>> = HashSet::new();
        let mut out = Vec::new();
        if limit == 0 {
            return out;
        }
        for proof in self.proof_trees(limit) {
            let ops = self.operations(&proof);
            if !seen.insert(ops.clone()) {
                continue;
            }
            let mut d = Derivation::ungrouped(ops);
            let ok = match replay(&d, grammar) {
                Ok(tree) => match group_instances(&tree, grammar, true) {
                    Some(inst) => {
                        d.instances = inst;
                        true
                    }
                    None => false,
                },
                Err(_) => false,
            };
            out.push((d, ok));
        }
        out
    }

    /// Nested-bracket text. A node printed before appears as `#id` only.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut printed = vec![false; self.nodes.len()];
        for &r in &self.roots {
            self.render_node(r, 0, &mut printed, &mut out);
        }
        out
    }

    fn render_node(&self, n: usize, depth: usize, printed: &mut [bool], out: &mut String) {
        let pad = "  ".repeat(depth);
        if printed[n] {
            let _ = writeln!(out, "{pad}#{n}");
            return;
        }
        printed[n] = true;
        let node = &self.nodes[n];
        let c = node.cell;
        let _ = writeln!(
            out,
            "{pad}(#{n} [{},{},{},{}] {} {} {} {}",
            c.i,
            c.j,
            c.k,
            c.l,
            node.item.node,
            node.item.version.tag(),
            node.item.passive,
            node.item.active
        );
        for alt in &node.alternatives {
            let _ = writeln!(out, "{pad}  {}", alt.justification.tag());
            for &ch in &alt.children {
                self.render_node(ch, depth + 2, printed, out);
            }
        }
        let _ = writeln!(out, "{pad})");
    }
}

/// Whether a forest node is an anchor leaf; handy for tests.
pub fn is_leaf(node: &ForestNode, grammar: &Grammar) -> bool {
    grammar
        .node(&node.item.node)
        .is_some_and(|n| n.kind != NodeKind::Internal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::load_grammar;
    use crate::recognizer::{Recognizer, RecognizerOptions};

    fn setup(text: &str) -> (Grammar, Recognizer) {
        let g = load_grammar(text).unwrap();
        let r = Recognizer::for_grammar(&g, RecognizerOptions::parsing());
        (g, r)
    }

    #[test]
    fn rejected_input_gives_empty_forest() {
        let (_, r) = setup("set s { tree a initial : (S \"a\") }");
        let p = r.parse(&["b"]).unwrap();
        assert!(build_forest(&p.chart).unwrap().is_empty());
    }

    #[test]
    fn unambiguous_input_has_one_alternative_everywhere() {
        let (g, r) = setup("set s { tree a initial : (S \"a\" (T \"b\")) }");
        let p = r.parse(&["a", "b"]).unwrap();
        let f = build_forest(&p.chart).unwrap();
        assert!(f.nodes.iter().all(|n| n.alternatives.len() == 1));
        assert_eq!(f.count_derivations(), 1);
        let ds = f.enumerate_derivations(&g, 10);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].to_string(), "start a@0\n");
        assert!(f.enumerate_derivations(&g, 0).is_empty());
    }

    #[test]
    fn ambiguous_adjunction_counts_match_enumeration() {
        let (g, r) = setup(
            "set i { tree a initial : (S (S \"a\")) }\nset j { tree b auxiliary : (S (S \"a\") (S! foot)) }",
        );
        let p = r.parse(&["a", "a", "a"]).unwrap();
        let f = build_forest(&p.chart).unwrap();
        let n = f.count_derivations();
        // each of the two uses can host the next one at either S node
        assert_eq!(n, 5);
        let ds = f.enumerate_derivations(&g, 100);
        assert_eq!(ds.len() as u128, n);
        for d in &ds {
            let t = replay(d, &g).unwrap();
            assert_eq!(t.frontier(), vec!["a", "a", "a"]);
        }
        let text = f.render();
        assert!(text.contains("case5"));
        assert!(text.lines().any(|l| l.trim_start().starts_with('#')));
    }

    #[test]
    fn chart_without_back_pointers_is_refused() {
        let g = load_grammar("set s { tree a initial : (S \"a\") }").unwrap();
        let r = Recognizer::for_grammar(&g, RecognizerOptions::default());
        let p = r.parse(&["a"]).unwrap();
        assert_eq!(
            build_forest(&p.chart).unwrap_err(),
            ForestError::NoBackPointers
        );
    }
}
