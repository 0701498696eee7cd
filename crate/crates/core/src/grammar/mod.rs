//! Grammar data model: tree sets, elementary trees, dominance links.
//!
//! A [`Grammar`] is immutable once built. The derived quantities (the global
//! link list, `c`, per-node requirement multisets, the address index) are
//! computed in [`Grammar::new`] and there is no way to mutate a grammar
//! afterwards, so they can never go stale.

mod binarize;
mod parse;
mod render;
mod validate;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

pub use binarize::binarize;
pub use parse::load_grammar;
pub use render::{render, render_tree};
pub use validate::{validate, Diagnostic, DiagnosticKind, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelKind {
    Terminal,
    Nonterminal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub name: String,
    pub kind: LabelKind,
}

impl Label {
    pub fn terminal(name: impl Into<String>) -> Self {
        Label {
            name: name.into(),
            kind: LabelKind::Terminal,
        }
    }

    pub fn nonterminal(name: impl Into<String>) -> Self {
        Label {
            name: name.into(),
            kind: LabelKind::Nonterminal,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// One step of a node address. Original nodes use 1-based child indices;
/// nodes inserted by binarization use [`GornStep::Fresh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GornStep {
    Child(u32),
    Fresh,
}

/// Grammar-wide unique node identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeAddress {
    pub set: String,
    pub tree: String,
    pub gorn: Vec<GornStep>,
}

impl NodeAddress {
    pub fn root(set: impl Into<String>, tree: impl Into<String>) -> Self {
        NodeAddress {
            set: set.into(),
            tree: tree.into(),
            gorn: Vec::new(),
        }
    }

    pub fn child(&self, index: u32) -> Self {
        let mut gorn = self.gorn.clone();
        gorn.push(GornStep::Child(index));
        NodeAddress {
            set: self.set.clone(),
            tree: self.tree.clone(),
            gorn,
        }
    }

    pub fn fresh(&self) -> Self {
        let mut gorn = self.gorn.clone();
        gorn.push(GornStep::Fresh);
        NodeAddress {
            set: self.set.clone(),
            tree: self.tree.clone(),
            gorn,
        }
    }

    pub fn is_fresh(&self) -> bool {
        self.gorn.contains(&GornStep::Fresh)
    }

    /// Gorn path as written in grammar files: `0` for the root, otherwise
    /// dot-separated 1-based indices (`*` for binarization nodes).
    pub fn gorn_string(&self) -> String {
        gorn_to_string(&self.gorn)
    }
}

pub(crate) fn gorn_to_string(gorn: &[GornStep]) -> String {
    if gorn.is_empty() {
        return "0".to_string();
    }
    gorn.iter()
        .map(|s| match s {
            GornStep::Child(i) => i.to_string(),
            GornStep::Fresh => "*".to_string(),
        })
        .collect::<Vec<_>>()
        .join(".")
}

impl fmt::Display for NodeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}@{}", self.set, self.tree, self.gorn_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdjMode {
    Any,
    Null,
    Obligatory,
    Selective,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjConstraint {
    pub mode: AdjMode,
    /// Auxiliary tree ids admitted; only meaningful for `Selective` and for
    /// `Obligatory` with a selection.
    pub allowed: BTreeSet<String>,
}

impl AdjConstraint {
    pub fn any() -> Self {
        AdjConstraint {
            mode: AdjMode::Any,
            allowed: BTreeSet::new(),
        }
    }

    pub fn null() -> Self {
        AdjConstraint {
            mode: AdjMode::Null,
            allowed: BTreeSet::new(),
        }
    }

    pub fn obligatory() -> Self {
        AdjConstraint {
            mode: AdjMode::Obligatory,
            allowed: BTreeSet::new(),
        }
    }

    pub fn selective<I, S>(trees: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        AdjConstraint {
            mode: AdjMode::Selective,
            allowed: trees.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_null(&self) -> bool {
        self.mode == AdjMode::Null
    }

    pub fn is_obligatory(&self) -> bool {
        self.mode == AdjMode::Obligatory
    }

    /// Whether an auxiliary tree with the given id may adjoin here. Label
    /// agreement is checked separately.
    pub fn admits(&self, aux_tree: &str) -> bool {
        match self.mode {
            AdjMode::Null => false,
            AdjMode::Any => true,
            AdjMode::Selective => self.allowed.contains(aux_tree),
            AdjMode::Obligatory => self.allowed.is_empty() || self.allowed.contains(aux_tree),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Internal,
    Anchor,
    Foot,
    SubstSlot,
    Epsilon,
}

/// Global dominance-link identifier (declaration order across the grammar).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkId(pub u32);

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub address: NodeAddress,
    pub label: Label,
    pub kind: NodeKind,
    pub constraint: AdjConstraint,
    /// Links targeting this node. Filled in by [`Grammar::new`].
    pub active_reqs: Vec<LinkId>,
    /// Links whose source is this node. Filled in by [`Grammar::new`].
    pub passive_reqs: Vec<LinkId>,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn internal(address: NodeAddress, label: &str, children: Vec<TreeNode>) -> Self {
        TreeNode {
            address,
            label: Label::nonterminal(label),
            kind: NodeKind::Internal,
            constraint: AdjConstraint::any(),
            active_reqs: Vec::new(),
            passive_reqs: Vec::new(),
            children,
        }
    }

    pub fn leaf(address: NodeAddress, label: Label, kind: NodeKind) -> Self {
        TreeNode {
            address,
            label,
            kind,
            constraint: AdjConstraint::null(),
            active_reqs: Vec::new(),
            passive_reqs: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn with_constraint(mut self, constraint: AdjConstraint) -> Self {
        self.constraint = constraint;
        self
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> impl Iterator<Item = &TreeNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    fn walk_mut(&mut self, f: &mut dyn FnMut(&mut TreeNode)) {
        f(self);
        for child in &mut self.children {
            child.walk_mut(f);
        }
    }

    pub fn is_foot(&self) -> bool {
        self.kind == NodeKind::Foot
    }

    /// Whether the foot node lies in this subtree.
    pub fn dominates_foot(&self) -> bool {
        self.walk().any(TreeNode::is_foot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeKind {
    Initial,
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryTree {
    pub id: String,
    pub kind: TreeKind,
    pub root: TreeNode,
}

impl ElementaryTree {
    pub fn foot_address(&self) -> Option<&NodeAddress> {
        self.root.walk().find(|n| n.is_foot()).map(|n| &n.address)
    }

    pub fn is_auxiliary(&self) -> bool {
        self.kind == TreeKind::Auxiliary
    }

    pub fn has_anchor(&self) -> bool {
        self.root.walk().any(|n| n.kind == NodeKind::Anchor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceLink {
    pub id: LinkId,
    pub source: NodeAddress,
    pub target: NodeAddress,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSet {
    pub id: String,
    pub trees: Vec<ElementaryTree>,
    pub links: Vec<DominanceLink>,
}

/// Link declaration before global ids are assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSpec {
    pub source: NodeAddress,
    pub target: NodeAddress,
}

/// Tree set as supplied to [`Grammar::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSetSpec {
    pub id: String,
    pub trees: Vec<ElementaryTree>,
    pub links: Vec<LinkSpec>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unresolved link endpoint {0}")]
    UnresolvedEndpoint(String),
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("duplicate node address {0}")]
    DuplicateAddress(String),
    #[error("link source is not a foot node: {0}")]
    LinkSourceNotFoot(String),
    #[error("unknown node address {0}")]
    UnknownAddress(String),
}

/// Position of a node inside the grammar: set index, tree index, child path.
#[derive(Debug, Clone, PartialEq, Eq)]
struct NodePos {
    set: usize,
    tree: usize,
    path: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    sets: Vec<TreeSet>,
    start: BTreeSet<String>,
    links: Vec<DominanceLink>,
    max_links_per_set: usize,
    index: HashMap<NodeAddress, NodePos>,
    fingerprint: u64,
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.sets == other.sets && self.start == other.start
    }
}

impl Eq for Grammar {}

impl Grammar {
    /// Build a grammar, assigning global link ids in declaration order and
    /// deriving every node's requirement multisets from the link list.
    pub fn new(
        sets: Vec<TreeSetSpec>,
        start: impl IntoIterator<Item = String>,
    ) -> Result<Self, GrammarError> {
        let mut start: BTreeSet<String> = start.into_iter().collect();
        if start.is_empty() {
            start.insert("S".to_string());
        }

        let mut set_ids = HashSet::new();
        let mut tree_ids = HashSet::new();
        for set in &sets {
            if !set_ids.insert(set.id.clone()) {
                return Err(GrammarError::DuplicateId(set.id.clone()));
            }
            for tree in &set.trees {
                if !tree_ids.insert(tree.id.clone()) {
                    return Err(GrammarError::DuplicateId(tree.id.clone()));
                }
            }
        }

        let mut built: Vec<TreeSet> = Vec::with_capacity(sets.len());
        let mut links = Vec::new();
        for spec in sets {
            let mut set_links = Vec::with_capacity(spec.links.len());
            for l in spec.links {
                if l.source.set != spec.id {
                    return Err(GrammarError::UnresolvedEndpoint(l.source.to_string()));
                }
                if l.target.set != spec.id {
                    return Err(GrammarError::UnresolvedEndpoint(l.target.to_string()));
                }
                let link = DominanceLink {
                    id: LinkId(links.len() as u32),
                    source: l.source,
                    target: l.target,
                };
                links.push(link.clone());
                set_links.push(link);
            }
            built.push(TreeSet {
                id: spec.id,
                trees: spec.trees,
                links: set_links,
            });
        }

        let mut index = HashMap::new();
        for (si, set) in built.iter_mut().enumerate() {
            for (ti, tree) in set.trees.iter_mut().enumerate() {
                tree.root.walk_mut(&mut |n| {
                    n.active_reqs.clear();
                    n.passive_reqs.clear();
                });
                let mut stack = vec![(Vec::new(), &tree.root)];
                while let Some((path, node)) = stack.pop() {
                    if node.address.set != set.id || node.address.tree != tree.id {
                        return Err(GrammarError::UnknownAddress(node.address.to_string()));
                    }
                    if index
                        .insert(
                            node.address.clone(),
                            NodePos {
                                set: si,
                                tree: ti,
                                path: path.clone(),
                            },
                        )
                        .is_some()
                    {
                        return Err(GrammarError::DuplicateAddress(node.address.to_string()));
                    }
                    for (ci, child) in node.children.iter().enumerate() {
                        let mut p = path.clone();
                        p.push(ci);
                        stack.push((p, child));
                    }
                }
            }
        }

        for link in &links {
            for endpoint in [&link.source, &link.target] {
                if !index.contains_key(endpoint) {
                    return Err(GrammarError::UnresolvedEndpoint(endpoint.to_string()));
                }
            }
        }

        let max_links_per_set = built.iter().map(|s| s.links.len()).max().unwrap_or(0);
        let mut grammar = Grammar {
            sets: built,
            start,
            links,
            max_links_per_set,
            index,
            fingerprint: 0,
        };
        for link in grammar.links.clone() {
            grammar.node_mut(&link.target).active_reqs.push(link.id);
            grammar.node_mut(&link.source).passive_reqs.push(link.id);
        }
        grammar.fingerprint = grammar.compute_fingerprint();
        Ok(grammar)
    }

    fn compute_fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.links.len().hash(&mut h);
        for l in &self.links {
            l.id.hash(&mut h);
            l.source.hash(&mut h);
            l.target.hash(&mut h);
        }
        h.finish()
    }

    fn node_mut(&mut self, addr: &NodeAddress) -> &mut TreeNode {
        let pos = self.index[addr].clone();
        let mut node = &mut self.sets[pos.set].trees[pos.tree].root;
        for &c in &pos.path {
            node = &mut node.children[c];
        }
        node
    }

    pub fn sets(&self) -> &[TreeSet] {
        &self.sets
    }

    pub fn start_labels(&self) -> &BTreeSet<String> {
        &self.start
    }

    /// Every dominance link, indexed by [`LinkId`].
    pub fn links(&self) -> &[DominanceLink] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> Option<&DominanceLink> {
        self.links.get(id.index())
    }

    /// `c`: the largest number of links declared in one tree set.
    pub fn max_links_per_set(&self) -> usize {
        self.max_links_per_set
    }

    /// Identifies the link structure; counters built for one grammar refuse
    /// to combine with counters of another. Binarization preserves it.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn trees(&self) -> impl Iterator<Item = (&TreeSet, &ElementaryTree)> {
        self.sets
            .iter()
            .flat_map(|s| s.trees.iter().map(move |t| (s, t)))
    }

    pub fn tree(&self, id: &str) -> Option<(&TreeSet, &ElementaryTree)> {
        self.trees().find(|(_, t)| t.id == id)
    }

    pub fn set(&self, id: &str) -> Option<&TreeSet> {
        self.sets.iter().find(|s| s.id == id)
    }

    pub fn node(&self, addr: &NodeAddress) -> Option<&TreeNode> {
        let pos = self.index.get(addr)?;
        let mut node = &self.sets[pos.set].trees[pos.tree].root;
        for &c in &pos.path {
            node = &node.children[c];
        }
        Some(node)
    }

    /// The active (`⊤`) and passive (`⊥`) requirement multisets of a node.
    pub fn node_requirements(
        &self,
        addr: &NodeAddress,
    ) -> Result<(Vec<LinkId>, Vec<LinkId>), GrammarError> {
        let node = self
            .node(addr)
            .ok_or_else(|| GrammarError::UnknownAddress(addr.to_string()))?;
        Ok((node.active_reqs.clone(), node.passive_reqs.clone()))
    }

    /// Terminal alphabet: every anchor label.
    pub fn terminals(&self) -> BTreeSet<String> {
        self.trees()
            .flat_map(|(_, t)| t.root.walk())
            .filter(|n| n.kind == NodeKind::Anchor)
            .map(|n| n.label.name.clone())
            .collect()
    }

    /// Reassemble the construction input, e.g. to rebuild after a transform.
    pub(crate) fn to_specs(&self) -> Vec<TreeSetSpec> {
        self.sets
            .iter()
            .map(|s| TreeSetSpec {
                id: s.id.clone(),
                trees: s.trees.clone(),
                links: s
                    .links
                    .iter()
                    .map(|l| LinkSpec {
                        source: l.source.clone(),
                        target: l.target.clone(),
                    })
                    .collect(),
            })
            .collect()
    }

    /// Whether every node has at most two children.
    pub fn is_two_form(&self) -> bool {
        self.trees()
            .flat_map(|(_, t)| t.root.walk())
            .all(|n| n.children.len() <= 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn requirement_multisets_come_from_links() {
        let g = load_grammar(
            "set s {\n tree a initial : (S \"x\" (T \"y\"))\n tree b auxiliary : (S (S! foot) \"z\")\n \
             link b@1 -> a@2\n link b@1 -> a@2\n}\n",
        )
        .unwrap();
        let target = NodeAddress::root("s", "a").child(2);
        let foot = NodeAddress::root("s", "b").child(1);
        assert_eq!(
            g.node_requirements(&target).unwrap(),
            (vec![LinkId(0), LinkId(1)], vec![])
        );
        assert_eq!(
            g.node_requirements(&foot).unwrap(),
            (vec![], vec![LinkId(0), LinkId(1)])
        );
        assert_eq!(g.max_links_per_set(), 2);
        assert!(g.node_requirements(&NodeAddress::root("s", "zz")).is_err());
    }

    #[test]
    fn start_defaults_to_s() {
        let g = load_grammar("set s { tree a initial : (S \"a\") }").unwrap();
        assert!(g.start_labels().contains("S"));
        assert_eq!(g.start_labels().len(), 1);
    }

    #[test]
    fn address_display() {
        let a = NodeAddress::root("g", "t").child(2).child(1);
        assert_eq!(a.to_string(), "g/t@2.1");
        assert_eq!(NodeAddress::root("g", "t").to_string(), "g/t@0");
        assert_eq!(NodeAddress::root("g", "t").fresh().gorn_string(), "*");
    }

    #[test]
    fn selective_admission() {
        let c = AdjConstraint::selective(["b1"]);
        assert!(c.admits("b1"));
        assert!(!c.admits("b2"));
        assert!(!AdjConstraint::null().admits("b1"));
        assert!(AdjConstraint::obligatory().admits("b2"));
    }
}
