//! Derivations, their replay into derived trees, and link verification.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write};

use thiserror::Error;

use crate::grammar::{Grammar, Label, LinkId, NodeAddress, NodeKind, TreeKind, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Start,
    Adjoin,
    Substitute,
}

/// One derivation step. Operation `i` introduces elementary-tree use `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operation {
    pub kind: OpKind,
    pub tree: String,
    /// Host use and host node; `None` for the start operation.
    pub host: Option<(usize, NodeAddress)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub ops: Vec<Operation>,
    /// Set instance of each use; uses of one instance share a number.
    pub instances: Vec<usize>,
}

impl Derivation {
    /// A derivation whose uses are each their own instance, to be grouped
    /// later by [`group_instances`].
    pub fn ungrouped(ops: Vec<Operation>) -> Self {
        let instances = (0..ops.len()).collect();
        Derivation { ops, instances }
    }

    pub fn uses(&self) -> usize {
        self.ops.len()
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (u, op) in self.ops.iter().enumerate() {
            let me = format!("{}@{}", op.tree, self.instances[u]);
            match (&op.kind, &op.host) {
                (OpKind::Start, _) | (_, None) => writeln!(f, "start {me}")?,
                (kind, Some((h, addr))) => {
                    let verb = if *kind == OpKind::Adjoin {
                        "adjoin"
                    } else {
                        "substitute"
                    };
                    let host = &self.ops[*h].tree;
                    writeln!(
                        f,
                        "{verb} {me} at {host}@{}@{}",
                        self.instances[*h],
                        addr.gorn_string()
                    )?
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("derivation is empty")]
    Empty,
    #[error("operation {0}: only the first operation may start a derivation")]
    MisplacedStart(usize),
    #[error("operation {0}: the start tree must be an initial tree")]
    StartNotInitial(usize),
    #[error("operation {0}: unknown tree {1}")]
    UnknownTree(usize, String),
    #[error("operation {0}: host use {1} does not precede it")]
    BadHostUse(usize, usize),
    #[error("operation {0}: {1} is not a node of the host tree")]
    UnknownHostNode(usize, NodeAddress),
    #[error("operation {0}: labels differ between {1} and tree {2}")]
    LabelMismatch(usize, NodeAddress, String),
    #[error("operation {0}: {1} does not admit adjunction of {2}")]
    NotAdmitted(usize, NodeAddress, String),
    #[error("operation {0}: {1} is not a substitution slot")]
    NotASlot(usize, NodeAddress),
    #[error("operation {0}: wrong tree kind for this operation")]
    WrongTreeKind(usize),
    #[error("operation {0}: node {1} already used")]
    HostTaken(usize, NodeAddress),
    #[error("use {0}: substitution slot {1} left open")]
    UnfilledSlot(usize, NodeAddress),
    #[error("use {0}: obligatory adjunction at {1} not performed")]
    ObligatoryMissing(usize, NodeAddress),
    #[error("derivation has {0} instance numbers for {1} operations")]
    InstanceCount(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedNode {
    pub label: Label,
    pub kind: NodeKind,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Elementary nodes realized by this node: `(use, address)`. Several
    /// when a foot merged with its host.
    pub origins: Vec<(usize, NodeAddress)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UseInfo {
    pub tree: String,
    pub set: String,
    pub instance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedTree {
    pub nodes: Vec<DerivedNode>,
    pub root: usize,
    pub uses: Vec<UseInfo>,
    images: HashMap<(usize, NodeAddress), usize>,
}

impl DerivedTree {
    pub fn frontier(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.kind == NodeKind::Anchor {
                out.push(node.label.name.clone());
            }
            stack.extend(node.children.iter().rev());
        }
        out
    }

    /// The derived node holding the children of elementary node `addr` in
    /// use `u`.
    pub fn image(&self, u: usize, addr: &NodeAddress) -> Option<usize> {
        self.images.get(&(u, addr.clone())).copied()
    }

    /// Reflexive dominance.
    pub fn dominates(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    pub fn set_instances(&mut self, instances: &[usize]) {
        for (u, &i) in instances.iter().enumerate() {
            self.uses[u].instance = i;
        }
    }

    /// Bracketed text, one node per line, each annotated with provenance.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_node(self.root, 0, &mut out);
        out
    }

    fn render_node(&self, n: usize, depth: usize, out: &mut String) {
        let node = &self.nodes[n];
        let pad = "  ".repeat(depth);
        let prov: Vec<String> = node
            .origins
            .iter()
            .map(|(u, a)| {
                format!(
                    "{}@{}@{}",
                    self.uses[*u].tree,
                    self.uses[*u].instance,
                    a.gorn_string()
                )
            })
            .collect();
        let prov = prov.join(" ");
        match node.kind {
            NodeKind::Anchor => {
                let _ = writeln!(out, "{pad}\"{}\"  # {prov}", node.label.name);
            }
            NodeKind::Epsilon => {
                let _ = writeln!(out, "{pad}(eps)  # {prov}");
            }
            _ => {
                let _ = writeln!(out, "{pad}({}  # {prov}", node.label.name);
                for &c in &node.children {
                    self.render_node(c, depth + 1, out);
                }
                let _ = writeln!(out, "{pad})");
            }
        }
    }
}

struct Builder<'g> {
    trees: Vec<&'g TreeNode>,
    adj: HashMap<(usize, NodeAddress), usize>,
    subst: HashMap<(usize, NodeAddress), usize>,
    nodes: Vec<DerivedNode>,
    images: HashMap<(usize, NodeAddress), usize>,
}

impl Builder<'_> {
    fn build(
        &mut self,
        u: usize,
        node: &TreeNode,
        foot_sub: Option<usize>,
    ) -> Result<usize, ReplayError> {
        let key = (u, node.address.clone());
        match node.kind {
            NodeKind::Foot => {
                let idx = foot_sub.expect("auxiliary trees are built with a foot target");
                self.nodes[idx].origins.push(key.clone());
                self.images.insert(key, idx);
                Ok(idx)
            }
            NodeKind::SubstSlot => {
                let Some(&sub) = self.subst.get(&key) else {
                    return Err(ReplayError::UnfilledSlot(u, node.address.clone()));
                };
                let root = self.trees[sub];
                let r = self.build(sub, root, None)?;
                let img = self.images[&(sub, root.address.clone())];
                self.nodes[img].origins.push(key.clone());
                self.images.insert(key, img);
                Ok(r)
            }
            _ => {
                let idx = self.nodes.len();
                self.nodes.push(DerivedNode {
                    label: node.label.clone(),
                    kind: node.kind,
                    parent: None,
                    children: Vec::new(),
                    origins: vec![key.clone()],
                });
                self.images.insert(key.clone(), idx);
                for child in &node.children {
                    let c = self.build(u, child, foot_sub)?;
                    self.nodes[idx].children.push(c);
                    self.nodes[c].parent = Some(idx);
                }
                match self.adj.get(&key) {
                    Some(&aux) => {
                        let root = self.trees[aux];
                        self.build(aux, root, Some(idx))
                    }
                    None if node.constraint.is_obligatory() => {
                        Err(ReplayError::ObligatoryMissing(u, node.address.clone()))
                    }
                    None => Ok(idx),
                }
            }
        }
    }
}

/// Replay a derivation. Addresses may refer to the original grammar or its
/// binarized form, as long as `grammar` is the one they came from.
pub fn replay(d: &Derivation, grammar: &Grammar) -> Result<DerivedTree, ReplayError> {
    if d.ops.is_empty() {
        return Err(ReplayError::Empty);
    }
    if d.instances.len() != d.ops.len() {
        return Err(ReplayError::InstanceCount(d.instances.len(), d.ops.len()));
    }
    let mut trees = Vec::new();
    let mut uses = Vec::new();
    let mut adj = HashMap::new();
    let mut subst = HashMap::new();
    for (i, op) in d.ops.iter().enumerate() {
        let (set, tree) = grammar
            .tree(&op.tree)
            .ok_or_else(|| ReplayError::UnknownTree(i, op.tree.clone()))?;
        trees.push(&tree.root);
        uses.push(UseInfo {
            tree: tree.id.clone(),
            set: set.id.clone(),
            instance: d.instances[i],
        });
        match (&op.kind, &op.host) {
            (OpKind::Start, _) => {
                if i != 0 {
                    return Err(ReplayError::MisplacedStart(i));
                }
                if tree.kind != TreeKind::Initial {
                    return Err(ReplayError::StartNotInitial(i));
                }
            }
            (_, None) => return Err(ReplayError::MisplacedStart(i)),
            (kind, Some((h, addr))) => {
                if i == 0 {
                    return Err(ReplayError::MisplacedStart(i));
                }
                if *h >= i {
                    return Err(ReplayError::BadHostUse(i, *h));
                }
                if addr.tree != uses[*h].tree {
                    return Err(ReplayError::UnknownHostNode(i, addr.clone()));
                }
                let host = grammar
                    .node(addr)
                    .ok_or_else(|| ReplayError::UnknownHostNode(i, addr.clone()))?;
                if host.label.name != tree.root.label.name {
                    return Err(ReplayError::LabelMismatch(i, addr.clone(), tree.id.clone()));
                }
                let key = (*h, addr.clone());
                if adj.contains_key(&key) || subst.contains_key(&key) {
                    return Err(ReplayError::HostTaken(i, addr.clone()));
                }
                if *kind == OpKind::Adjoin {
                    if tree.kind != TreeKind::Auxiliary {
                        return Err(ReplayError::WrongTreeKind(i));
                    }
                    if host.kind != NodeKind::Internal || !host.constraint.admits(&tree.id) {
                        return Err(ReplayError::NotAdmitted(i, addr.clone(), tree.id.clone()));
                    }
                    adj.insert(key, i);
                } else {
                    if tree.kind != TreeKind::Initial {
                        return Err(ReplayError::WrongTreeKind(i));
                    }
                    if host.kind != NodeKind::SubstSlot {
                        return Err(ReplayError::NotASlot(i, addr.clone()));
                    }
                    subst.insert(key, i);
                }
            }
        }
    }
    let mut b = Builder {
        trees,
        adj,
        subst,
        nodes: Vec::new(),
        images: HashMap::new(),
    };
    let start = b.trees[0];
    let root = b.build(0, start, None)?;
    Ok(DerivedTree {
        nodes: b.nodes,
        root,
        uses,
        images: b.images,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkViolation {
    pub link: LinkId,
    pub set: String,
    pub instance: usize,
    pub reason: String,
}

impl fmt::Display for LinkViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "link {} of {}#{}: {}",
            self.link, self.set, self.instance, self.reason
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkReport {
    pub violations: Vec<LinkViolation>,
}

impl LinkReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn link_holds(
    tree: &DerivedTree,
    src_use: usize,
    src: &NodeAddress,
    tgt_use: usize,
    tgt: &NodeAddress,
) -> bool {
    match (tree.image(src_use, src), tree.image(tgt_use, tgt)) {
        (Some(a), Some(b)) => tree.dominates(a, b),
        _ => false,
    }
}

/// Check every link of every used set instance, using the instance numbers
/// recorded in the tree.
pub fn verify_links(tree: &DerivedTree, grammar: &Grammar) -> LinkReport {
    let mut report = LinkReport::default();
    let mut groups: BTreeMap<(String, usize), Vec<usize>> = BTreeMap::new();
    for (u, info) in tree.uses.iter().enumerate() {
        groups
            .entry((info.set.clone(), info.instance))
            .or_default()
            .push(u);
    }
    for ((set_id, instance), members) in &groups {
        let Some(set) = grammar.set(set_id) else {
            continue;
        };
        let find = |t: &str| -> Result<Option<usize>, ()> {
            let hits: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&u| tree.uses[u].tree == t)
                .collect();
            match hits.len() {
                0 => Ok(None),
                1 => Ok(Some(hits[0])),
                _ => Err(()),
            }
        };
        for link in &set.links {
            let violation = |reason: String| LinkViolation {
                link: link.id,
                set: set_id.clone(),
                instance: *instance,
                reason,
            };
            match (find(&link.source.tree), find(&link.target.tree)) {
                (Err(()), _) | (_, Err(())) => report
                    .violations
                    .push(violation("instance uses one tree more than once".into())),
                (Ok(Some(s)), Ok(Some(t))) => {
                    if !link_holds(tree, s, &link.source, t, &link.target) {
                        report.violations.push(violation(format!(
                            "{} does not dominate {}",
                            link.source, link.target
                        )));
                    }
                }
                _ => report
                    .violations
                    .push(violation("an endpoint tree is not used".into())),
            }
        }
    }
    report
}

/// Partition uses into set instances so that every link holds.
///
/// With `whole_set`, every instance contains each tree of its set exactly
/// once. Otherwise instances may be partial and links with a missing
/// endpoint are ignored. The first consistent grouping in a fixed search
/// order is returned, numbered by each instance's first use.
pub fn group_instances(
    tree: &DerivedTree,
    grammar: &Grammar,
    whole_set: bool,
) -> Option<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for set in grammar.sets() {
        let by_tree: Vec<Vec<usize>> = set
            .trees
            .iter()
            .map(|t| {
                (0..tree.uses.len())
                    .filter(|&u| tree.uses[u].tree == t.id)
                    .collect()
            })
            .collect();
        let k = by_tree.iter().map(Vec::len).max().unwrap_or(0);
        if k == 0 {
            continue;
        }
        if whole_set && by_tree.iter().any(|v| v.len() != k) {
            return None;
        }
        let mut taken: Vec<Vec<bool>> = by_tree.iter().map(|v| vec![false; v.len()]).collect();
        let mut search = SetSearch {
            tree,
            set,
            by_tree: &by_tree,
            whole_set,
            out: Vec::new(),
        };
        if !search.instance(k, &mut taken) {
            return None;
        }
        groups.extend(search.out);
    }
    groups.sort_by_key(|g| g.iter().copied().min());
    let mut instances = vec![0; tree.uses.len()];
    for (i, g) in groups.iter().enumerate() {
        for &u in g {
            instances[u] = i;
        }
    }
    Some(instances)
}

struct SetSearch<'a> {
    tree: &'a DerivedTree,
    set: &'a crate::grammar::TreeSet,
    by_tree: &'a [Vec<usize>],
    whole_set: bool,
    out: Vec<Vec<usize>>,
}

impl SetSearch<'_> {
    /// Fill `remaining` more instances.
    fn instance(&mut self, remaining: usize, taken: &mut [Vec<bool>]) -> bool {
        if remaining == 0 {
            return true;
        }
        self.pick(0, remaining, taken, &mut Vec::new())
    }

    fn pick(
        &mut self,
        t: usize,
        remaining: usize,
        taken: &mut [Vec<bool>],
        current: &mut Vec<Option<usize>>,
    ) -> bool {
        if t == self.by_tree.len() {
            if current.iter().all(Option::is_none) {
                return false;
            }
            let group: Vec<usize> = current.iter().flatten().copied().collect();
            self.out.push(group);
            if self.instance(remaining - 1, taken) {
                return true;
            }
            self.out.pop();
            return false;
        }
        let free: Vec<usize> = (0..self.by_tree[t].len())
            .filter(|&i| !taken[t][i])
            .collect();
        // the first tree with free uses always takes its earliest one, which
        // fixes the order of otherwise interchangeable instances
        let leading = current.iter().all(Option::is_none);
        let candidates: Vec<usize> = if leading && !free.is_empty() {
            vec![free[0]]
        } else {
            free.clone()
        };
        for i in candidates {
            let u = self.by_tree[t][i];
            current.push(Some(u));
            if self.consistent(current) {
                taken[t][i] = true;
                if self.pick(t + 1, remaining, taken, current) {
                    return true;
                }
                taken[t][i] = false;
            }
            current.pop();
        }
        let may_skip = !self.whole_set && free.len() < remaining;
        if may_skip || free.is_empty() {
            current.push(None);
            let ok = self.pick(t + 1, remaining, taken, current);
            current.pop();
            return ok;
        }
        false
    }

    /// Links among the trees chosen so far hold.
    fn consistent(&self, current: &[Option<usize>]) -> bool {
        let pos = |id: &str| self.set.trees.iter().position(|t| t.id == id);
        self.set.links.iter().all(|link| {
            let (Some(s), Some(t)) = (pos(&link.source.tree), pos(&link.target.tree)) else {
                return true;
            };
            match (
                current.get(s).copied().flatten(),
                current.get(t).copied().flatten(),
            ) {
                (Some(su), Some(tu)) => link_holds(self.tree, su, &link.source, tu, &link.target),
                _ => true,
            }
        })
    }
}
