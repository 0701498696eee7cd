//! Flat, index-based view of a two-form grammar for the chart engine.

use std::collections::HashMap;

use crate::grammar::{AdjMode, Grammar, NodeAddress, NodeKind, TreeNode};
use crate::linkcounter::LinkCounter;

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub(crate) struct CNode {
    pub addr: NodeAddress,
    pub label: u32,
    pub kind: NodeKind,
    pub tree: u32,
    pub parent: u32,
    pub children: [u32; 2],
    pub arity: u8,
    /// Position among the parent's children (0 or 1).
    pub slot: u8,
    /// Dominates the foot of its tree (chart items carry a gap).
    pub spine: bool,
    pub null: bool,
    pub obligatory: bool,
    /// `None` admits every auxiliary tree with a matching label.
    pub admitted: Option<Vec<u32>>,
    /// Interned `⊤(η)` / `⊥(η)`.
    pub active: u32,
    pub passive: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct CTree {
    pub root: u32,
    pub auxiliary: bool,
    pub label: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub nodes: Vec<CNode>,
    pub trees: Vec<CTree>,
    pub dim: usize,
    pub max_links_per_set: usize,
    pub fingerprint: u64,
    /// Base counters: node requirement multisets. Id 0 is the zero counter.
    pub base_counters: Vec<Vec<u32>>,
    pub terminals: HashMap<String, u32>,
    pub anchors_by_terminal: Vec<Vec<u32>>,
    pub epsilons: Vec<u32>,
    pub feet: Vec<u32>,
    /// Substitution slots per nonterminal label.
    pub slots_by_label: Vec<Vec<u32>>,
    /// Initial roots whose label is a start label.
    pub accepting_roots: Vec<u32>,
    pub nonterminal_count: usize,
    pub by_address: HashMap<NodeAddress, u32>,
}

impl Compiled {
    pub fn new(grammar: &Grammar) -> Self {
        let mut labels: HashMap<String, u32> = HashMap::new();
        let mut terminals: HashMap<String, u32> = HashMap::new();
        let dim = grammar.links().len();
        let mut base: Vec<Vec<u32>> = vec![vec![0; dim]];
        let mut base_index: HashMap<Vec<u32>, u32> = HashMap::new();
        base_index.insert(vec![0; dim], 0);
        let mut intern = |reqs: &[crate::grammar::LinkId]| -> u32 {
            let v = LinkCounter::from_multiset(grammar, reqs)
                .expect("requirements name declared links")
                .as_slice()
                .to_vec();
            *base_index.entry(v.clone()).or_insert_with(|| {
                base.push(v);
                (base.len() - 1) as u32
            })
        };

        let mut c = Compiled {
            nodes: Vec::new(),
            trees: Vec::new(),
            dim,
            max_links_per_set: grammar.max_links_per_set(),
            fingerprint: grammar.fingerprint(),
            base_counters: Vec::new(),
            terminals: HashMap::new(),
            anchors_by_terminal: Vec::new(),
            epsilons: Vec::new(),
            feet: Vec::new(),
            slots_by_label: Vec::new(),
            accepting_roots: Vec::new(),
            nonterminal_count: 0,
            by_address: HashMap::new(),
        };

        // Tree ids first so selective constraints can be resolved.
        let tree_index: HashMap<&str, u32> = grammar
            .trees()
            .enumerate()
            .map(|(i, (_, t))| (t.id.as_str(), i as u32))
            .collect();

        for (ti, (_, tree)) in grammar.trees().enumerate() {
            let root = c.nodes.len() as u32;
            let mut stack: Vec<(&TreeNode, u32, u8)> = vec![(&tree.root, NONE, 0)];
            while let Some((node, parent, slot)) = stack.pop() {
                let id = c.nodes.len() as u32;
                let label = if node.kind == NodeKind::Anchor {
                    let next = terminals.len() as u32;
                    *terminals.entry(node.label.name.clone()).or_insert(next)
                } else {
                    let next = labels.len() as u32;
                    *labels.entry(node.label.name.clone()).or_insert(next)
                };
                let admitted = match node.constraint.mode {
                    AdjMode::Selective | AdjMode::Obligatory
                        if !node.constraint.allowed.is_empty() =>
                    {
                        Some(
                            node.constraint
                                .allowed
                                .iter()
                                .filter_map(|t| tree_index.get(t.as_str()).copied())
                                .collect(),
                        )
                    }
                    _ => None,
                };
                c.nodes.push(CNode {
                    addr: node.address.clone(),
                    label,
                    kind: node.kind,
                    tree: ti as u32,
                    parent,
                    children: [NONE, NONE],
                    arity: node.children.len() as u8,
                    slot,
                    spine: node.dominates_foot(),
                    null: node.constraint.is_null() || node.kind != NodeKind::Internal,
                    obligatory: node.constraint.is_obligatory(),
                    admitted,
                    active: intern(&node.active_reqs),
                    passive: intern(&node.passive_reqs),
                });
                c.by_address.insert(node.address.clone(), id);
                if parent != NONE {
                    c.nodes[parent as usize].children[slot as usize] = id;
                }
                for (ci, child) in node.children.iter().enumerate().rev() {
                    stack.push((child, id, ci as u8));
                }
            }
            c.trees.push(CTree {
                root,
                auxiliary: tree.is_auxiliary(),
                label: c.nodes[root as usize].label,
            });
        }

        c.nonterminal_count = labels.len();
        c.slots_by_label = vec![Vec::new(); labels.len()];
        c.anchors_by_terminal = vec![Vec::new(); terminals.len()];
        for (id, node) in c.nodes.iter().enumerate() {
            let id = id as u32;
            match node.kind {
                NodeKind::Anchor => c.anchors_by_terminal[node.label as usize].push(id),
                NodeKind::Epsilon => c.epsilons.push(id),
                NodeKind::Foot => c.feet.push(id),
                NodeKind::SubstSlot => c.slots_by_label[node.label as usize].push(id),
                NodeKind::Internal => {}
            }
        }
        for tree in &c.trees {
            if tree.auxiliary {
                continue;
            }
            let name = labels
                .iter()
                .find(|(_, &v)| v == tree.label)
                .map(|(k, _)| k.as_str());
            if name.is_some_and(|n| grammar.start_labels().contains(n)) {
                c.accepting_roots.push(tree.root);
            }
        }
        c.base_counters = base;
        c.terminals = terminals;
        c
    }

    pub fn admits(&self, host: u32, aux_tree: u32) -> bool {
        let node = &self.nodes[host as usize];
        if node.null {
            return false;
        }
        match &node.admitted {
            None => true,
            Some(list) => list.contains(&aux_tree),
        }
    }
}
