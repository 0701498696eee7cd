//! The four-index chart and its agenda-driven saturation.
//!
//! A cell `T[i,j,k,l]` holds items for nodes whose derived subtree spans
//! boundaries `i..l` with a foot gap `j..k`. Items of nodes that do not
//! dominate a foot are stored in the canonical footless form `j = k = l`.

use std::fmt::Write;

use rustc_hash::FxHashMap;

use super::compiled::{Compiled, NONE};
use super::rules::{self, Counters};
use super::{RecognizeError, Recognizer};
use crate::grammar::NodeAddress;
use crate::linkcounter::{raw, write_counts, LinkCounter};

/// Largest direct-mapped item table, in entries.
const DENSE_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
}

impl CellIndex {
    pub fn new(i: usize, j: usize, k: usize, l: usize) -> Self {
        CellIndex { i, j, k, l }
    }

    fn from_raw(c: [u8; 4]) -> Self {
        CellIndex::new(c[0] as usize, c[1] as usize, c[2] as usize, c[3] as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Version {
    Top,
    Bottom,
}

impl Version {
    pub fn tag(self) -> char {
        match self {
            Version::Top => 'T',
            Version::Bottom => 'B',
        }
    }
}

/// A chart entry in grammar terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChartItem {
    pub node: NodeAddress,
    pub version: Version,
    pub passive: LinkCounter,
    pub active: LinkCounter,
}

pub type ItemId = u32;

/// How an item was derived. Antecedents are item ids in the same chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Justification {
    /// Anchor, epsilon or foot initialization.
    Init,
    /// Binary node, left child dominates the foot.
    Case1(ItemId, ItemId),
    /// Binary node, right child dominates the foot.
    Case2(ItemId, ItemId),
    /// Binary node, no foot below.
    Case3(ItemId, ItemId),
    /// Unary node.
    Case4(ItemId),
    /// Adjunction at a node dominating the foot.
    Case5a { host: ItemId, aux: ItemId },
    /// Adjunction at a node not dominating the foot.
    Case5b { host: ItemId, aux: ItemId },
    /// No adjunction.
    Case6(ItemId),
    /// Substitution of a derived initial tree.
    Subst { root: ItemId },
}

impl Justification {
    pub fn tag(&self) -> &'static str {
        match self {
            Justification::Init => "init",
            Justification::Case1(..) => "case1",
            Justification::Case2(..) => "case2",
            Justification::Case3(..) => "case3",
            Justification::Case4(_) => "case4",
            Justification::Case5a { .. } => "case5a",
            Justification::Case5b { .. } => "case5b",
            Justification::Case6(_) => "case6",
            Justification::Subst { .. } => "subst",
        }
    }

    pub fn antecedents(&self) -> Vec<ItemId> {
        match *self {
            Justification::Init => vec![],
            Justification::Case1(a, b)
            | Justification::Case2(a, b)
            | Justification::Case3(a, b) => vec![a, b],
            Justification::Case4(a) | Justification::Case6(a) => vec![a],
            Justification::Case5a { host, aux } | Justification::Case5b { host, aux } => {
                vec![host, aux]
            }
            Justification::Subst { root } => vec![root],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct RawItem {
    pub cell: [u8; 4],
    pub top: bool,
    pub node: u32,
    pub passive: u32,
    pub active: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChartStats {
    pub items: usize,
    pub cells: usize,
    /// Rule conclusions discarded by the pruning bound.
    pub pruned: u64,
}

/// Interned link-counters of one chart. Id 0 is the zero counter.
#[derive(Debug, Clone)]
struct Pool {
    dim: usize,
    data: Vec<u32>,
    norms: Vec<u64>,
    map: FxHashMap<Box<[u32]>, u32>,
    base_len: usize,
}

impl Pool {
    fn new(compiled: &Compiled) -> Self {
        let mut pool = Pool {
            dim: compiled.dim,
            data: Vec::new(),
            norms: Vec::new(),
            map: FxHashMap::default(),
            base_len: 0,
        };
        for v in &compiled.base_counters {
            pool.intern(v);
        }
        pool.base_len = pool.norms.len();
        pool
    }

    fn reset(&mut self) {
        let base = self.base_len as u32;
        self.data.truncate(self.base_len * self.dim);
        self.norms.truncate(self.base_len);
        self.map.retain(|_, id| *id < base);
    }

    fn get(&self, id: u32) -> &[u32] {
        let s = id as usize * self.dim;
        &self.data[s..s + self.dim]
    }

    fn intern(&mut self, v: &[u32]) -> u32 {
        if let Some(&id) = self.map.get(v) {
            return id;
        }
        let id = self.norms.len() as u32;
        self.data.extend_from_slice(v);
        self.norms.push(raw::norm(v));
        self.map.insert(v.into(), id);
        id
    }
}

/// Chart for one input. Reusable: [`Chart::run`] resets it.
pub struct Chart<'r> {
    rec: &'r Recognizer,
    n: usize,
    items: Vec<RawItem>,
    lookup: FxHashMap<RawItem, u32>,
    /// Direct-mapped item ids, used instead of `lookup` when the grammar
    /// has no links (all counters are then zero).
    dense: Vec<u32>,
    justs: Vec<Vec<Justification>>,
    agenda: Vec<u32>,
    head_start: Vec<u32>,
    head_end: Vec<u32>,
    head_host: Vec<u32>,
    head_aux: Vec<u32>,
    next_start: Vec<u32>,
    next_end: Vec<u32>,
    next_host: Vec<u32>,
    next_aux: Vec<u32>,
    pool: Pool,
    buf_p: Vec<u32>,
    buf_a: Vec<u32>,
    pruned: u64,
    over_budget: bool,
    /// Boundaries seeded so far; equals `n` outside incremental use.
    cur: usize,
    /// Input length the pruning bound is computed for.
    prune_n: usize,
    /// Item ids in the order they entered the indexes.
    index_log: Vec<u32>,
    /// `(items, index_log, pruned)` before each [`Chart::push`].
    checkpoints: Vec<(usize, usize, u64)>,
}

impl<'r> Chart<'r> {
    pub(crate) fn new(rec: &'r Recognizer) -> Self {
        let dim = rec.compiled.dim;
        let mut chart = Chart {
            rec,
            n: 0,
            items: Vec::new(),
            lookup: FxHashMap::default(),
            dense: Vec::new(),
            justs: Vec::new(),
            agenda: Vec::new(),
            head_start: Vec::new(),
            head_end: Vec::new(),
            head_host: Vec::new(),
            head_aux: Vec::new(),
            next_start: Vec::new(),
            next_end: Vec::new(),
            next_host: Vec::new(),
            next_aux: Vec::new(),
            pool: Pool::new(&rec.compiled),
            buf_p: vec![0; dim],
            buf_a: vec![0; dim],
            pruned: 0,
            over_budget: false,
            cur: 0,
            prune_n: 0,
            index_log: Vec::new(),
            checkpoints: Vec::new(),
        };
        chart.reset(0);
        chart
    }

    /// Empty the chart for an input of length `n`.
    pub fn reset(&mut self, n: usize) {
        let c = &self.rec.compiled;
        if !self.dense.is_empty() {
            for id in 0..self.items.len() {
                let slot = self.dense_slot(&self.items[id]);
                self.dense[slot] = NONE;
            }
        }
        self.n = n;
        self.items.clear();
        self.lookup.clear();
        let w = n + 1;
        let size = w.pow(4) * c.nodes.len() * 2;
        if c.dim == 0 && size <= DENSE_LIMIT {
            if self.dense.len() < size {
                self.dense.clear();
                self.dense.resize(size, NONE);
            }
        } else {
            self.dense = Vec::new();
        }
        self.justs.clear();
        self.agenda.clear();
        for (head, len) in [
            (&mut self.head_start, c.nodes.len() * w),
            (&mut self.head_end, c.nodes.len() * w),
            (&mut self.head_host, c.nonterminal_count * w * w),
            (&mut self.head_aux, c.nonterminal_count * w * w),
        ] {
            head.clear();
            head.resize(len, NONE);
        }
        self.next_start.clear();
        self.next_end.clear();
        self.next_host.clear();
        self.next_aux.clear();
        self.pool.reset();
        self.pruned = 0;
        self.over_budget = false;
        self.cur = n;
        self.prune_n = n;
        self.index_log.clear();
        self.checkpoints.clear();
    }

    /// Number of input tokens the chart currently covers.
    pub fn len(&self) -> usize {
        self.cur
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn compiled(&self) -> &'r Compiled {
        &self.rec.compiled
    }

    /// Slot of an item in `dense`, laid out for the current width.
    fn dense_slot(&self, key: &RawItem) -> usize {
        let w = self.n + 1;
        let [i, j, k, l] = key.cell.map(usize::from);
        ((((i * w + j) * w + k) * w + l) * self.rec.compiled.nodes.len() + key.node as usize) * 2
            + key.top as usize
    }

    fn lookup_id(&self, key: &RawItem) -> Option<u32> {
        if self.dense.is_empty() {
            self.lookup.get(key).copied()
        } else {
            Some(self.dense[self.dense_slot(key)]).filter(|&id| id != NONE)
        }
    }

    fn add(&mut self, key: RawItem, just: Justification) {
        if let Some(id) = self.lookup_id(&key) {
            if self.rec.options.back_pointers {
                self.justs[id as usize].push(just);
            }
            return;
        }
        if self.rec.options.prune {
            let norm = self.pool.norms[key.passive as usize] + self.pool.norms[key.active as usize];
            if norm > (self.compiled().max_links_per_set as u64) * (self.prune_n as u64) {
                self.pruned += 1;
                return;
            }
        }
        if let Some(max) = self.rec.options.max_items {
            if self.items.len() >= max {
                self.over_budget = true;
                return;
            }
        }
        let id = self.items.len() as u32;
        self.items.push(key);
        if self.dense.is_empty() {
            self.lookup.insert(key, id);
        } else {
            let slot = self.dense_slot(&key);
            self.dense[slot] = id;
        }
        if self.rec.options.back_pointers {
            self.justs.push(vec![just]);
        }
        self.next_start.push(NONE);
        self.next_end.push(NONE);
        self.next_host.push(NONE);
        self.next_aux.push(NONE);
        self.agenda.push(id);
    }

    /// Seed anchors matching each token and epsilon leaves at every boundary.
    pub fn init_leaves(&mut self, tokens: &[u32]) {
        let c = self.compiled();
        for (pos, &tok) in tokens.iter().enumerate() {
            if tok == NONE {
                continue;
            }
            let b = (pos + 1) as u8;
            for &anchor in &c.anchors_by_terminal[tok as usize] {
                let key = RawItem {
                    cell: [pos as u8, b, b, b],
                    top: true,
                    node: anchor,
                    passive: 0,
                    active: c.nodes[anchor as usize].active,
                };
                self.add(key, Justification::Init);
            }
        }
        for i in 0..=self.n {
            let b = i as u8;
            for &eps in &c.epsilons {
                let key = RawItem {
                    cell: [b, b, b, b],
                    top: true,
                    node: eps,
                    passive: 0,
                    active: c.nodes[eps as usize].active,
                };
                self.add(key, Justification::Init);
            }
        }
    }

    /// Seed every foot node with every gap `i..j`, `i <= j`.
    pub fn init_feet(&mut self) {
        let c = self.compiled();
        for &foot in &c.feet {
            let node = &c.nodes[foot as usize];
            for i in 0..=self.n {
                for j in i..=self.n {
                    let key = RawItem {
                        cell: [i as u8, i as u8, j as u8, j as u8],
                        top: false,
                        node: foot,
                        passive: node.passive,
                        active: node.active,
                    };
                    self.add(key, Justification::Init);
                }
            }
        }
    }

    /// Apply the inference rules until no new item appears.
    pub fn saturate(&mut self) -> Result<(), RecognizeError> {
        while let Some(id) = self.agenda.pop() {
            self.index(id);
            self.process(id);
            if self.over_budget {
                return Err(RecognizeError::ItemBudget(self.items.len()));
            }
        }
        Ok(())
    }

    /// Re-run every rule over every item; returns how many items that added.
    /// On a saturated chart this is always zero.
    pub fn rescan(&mut self) -> Result<usize, RecognizeError> {
        let before = self.items.len();
        for h in [
            &mut self.head_start,
            &mut self.head_end,
            &mut self.head_host,
            &mut self.head_aux,
        ] {
            h.fill(NONE);
        }
        for nx in [
            &mut self.next_start,
            &mut self.next_end,
            &mut self.next_host,
            &mut self.next_aux,
        ] {
            nx.fill(NONE);
        }
        self.index_log.clear();
        let saved_justs = self.rec.options.back_pointers.then(|| self.justs.clone());
        self.agenda = (0..self.items.len() as u32).rev().collect();
        self.saturate()?;
        if let Some(j) = saved_justs {
            // rescanning rediscovers old justifications; keep the originals
            let mut j = j;
            j.extend(self.justs.drain(before..));
            self.justs = j;
        }
        Ok(self.items.len() - before)
    }

    fn w(&self) -> usize {
        self.n + 1
    }

    fn index(&mut self, id: u32) {
        let c = self.compiled();
        let it = self.items[id as usize];
        let node = &c.nodes[it.node as usize];
        let w = self.w();
        let [i, j, k, l] = it.cell.map(usize::from);
        let from_top = self.rec.options.variants.adjoin_from_top;
        self.index_log.push(id);
        if it.top {
            if node.parent != NONE {
                let s = it.node as usize * w + i;
                self.next_start[id as usize] = self.head_start[s];
                self.head_start[s] = id;
                let e = it.node as usize * w + l;
                self.next_end[id as usize] = self.head_end[e];
                self.head_end[e] = id;
            } else if c.trees[node.tree as usize].auxiliary {
                let a = (node.label as usize * w + j) * w + k;
                self.next_aux[id as usize] = self.head_aux[a];
                self.head_aux[a] = id;
            }
        }
        if it.top == from_top && !node.null {
            let h = (node.label as usize * w + i) * w + l;
            self.next_host[id as usize] = self.head_host[h];
            self.head_host[h] = id;
        }
    }

    fn process(&mut self, id: u32) {
        let c = self.compiled();
        let it = self.items[id as usize];
        let node = &c.nodes[it.node as usize];
        let w = self.w();
        let [i, j, k, l] = it.cell.map(usize::from);
        let from_top = self.rec.options.variants.adjoin_from_top;

        if it.top {
            if node.parent != NONE {
                let parent = &c.nodes[node.parent as usize];
                if parent.arity == 1 {
                    let (p, a) = if c.dim == 0 {
                        (0, 0)
                    } else {
                        rules::unary(
                            Counters {
                                passive: self.pool.get(it.passive),
                                active: self.pool.get(it.active),
                            },
                            self.pool.get(parent.active),
                            &mut self.buf_p,
                            &mut self.buf_a,
                        );
                        (self.pool.intern(&self.buf_p), self.pool.intern(&self.buf_a))
                    };
                    let key = RawItem {
                        cell: it.cell,
                        top: false,
                        node: node.parent,
                        passive: p,
                        active: a,
                    };
                    self.add(key, Justification::Case4(id));
                } else {
                    let sib = parent.children[1 - node.slot as usize];
                    if node.slot == 0 {
                        let mut cur = self.head_start[sib as usize * w + l];
                        while cur != NONE {
                            self.combine(node.parent, id, cur);
                            cur = self.next_start[cur as usize];
                        }
                    } else {
                        let mut cur = self.head_end[sib as usize * w + i];
                        while cur != NONE {
                            self.combine(node.parent, cur, id);
                            cur = self.next_end[cur as usize];
                        }
                    }
                }
            } else {
                let tree = &c.trees[node.tree as usize];
                if tree.auxiliary {
                    let mut cur = self.head_host[(node.label as usize * w + j) * w + k];
                    while cur != NONE {
                        let host_node = self.items[cur as usize].node;
                        if c.admits(host_node, node.tree) {
                            self.adjoin(cur, id);
                        }
                        cur = self.next_host[cur as usize];
                    }
                } else if it.passive == 0 || c.dim == 0 {
                    for &slot in &c.slots_by_label[node.label as usize] {
                        let a = if c.dim == 0 {
                            0
                        } else {
                            let fired = rules::substitute(
                                Counters {
                                    passive: self.pool.get(it.passive),
                                    active: self.pool.get(it.active),
                                },
                                self.pool.get(c.nodes[slot as usize].active),
                                &mut self.buf_a,
                            );
                            debug_assert!(fired);
                            self.pool.intern(&self.buf_a)
                        };
                        let key = RawItem {
                            cell: it.cell,
                            top: true,
                            node: slot,
                            passive: 0,
                            active: a,
                        };
                        self.add(key, Justification::Subst { root: id });
                    }
                }
            }
        } else if !node.obligatory {
            let key = RawItem { top: true, ..it };
            self.add(key, Justification::Case6(id));
        }

        if it.top == from_top && !node.null {
            let mut cur = self.head_aux[(node.label as usize * w + i) * w + l];
            while cur != NONE {
                let aux_tree = c.nodes[self.items[cur as usize].node as usize].tree;
                if c.admits(it.node, aux_tree) {
                    self.adjoin(id, cur);
                }
                cur = self.next_aux[cur as usize];
            }
        }
    }

    fn combine(&mut self, parent: u32, left: u32, right: u32) {
        let c = self.compiled();
        let (li, ri) = (self.items[left as usize], self.items[right as usize]);
        let ls = c.nodes[li.node as usize].spine;
        let rs = c.nodes[ri.node as usize].spine;
        let cell = if ls {
            [li.cell[0], li.cell[1], li.cell[2], ri.cell[3]]
        } else if rs {
            [li.cell[0], ri.cell[1], ri.cell[2], ri.cell[3]]
        } else {
            let r = ri.cell[3];
            [li.cell[0], r, r, r]
        };
        let (p, a) = if c.dim == 0 {
            (0, 0)
        } else {
            let fired = rules::combine_children(
                Counters {
                    passive: self.pool.get(li.passive),
                    active: self.pool.get(li.active),
                },
                Counters {
                    passive: self.pool.get(ri.passive),
                    active: self.pool.get(ri.active),
                },
                ls,
                rs,
                self.pool.get(c.nodes[parent as usize].active),
                self.rec.options.variants,
                &mut self.buf_p,
                &mut self.buf_a,
            );
            if !fired {
                return;
            }
            (self.pool.intern(&self.buf_p), self.pool.intern(&self.buf_a))
        };
        let just = if ls {
            Justification::Case1(left, right)
        } else if rs {
            Justification::Case2(left, right)
        } else {
            Justification::Case3(left, right)
        };
        self.add(
            RawItem {
                cell,
                top: false,
                node: parent,
                passive: p,
                active: a,
            },
            just,
        );
    }

    fn adjoin(&mut self, host: u32, aux: u32) {
        let c = self.compiled();
        let (h, x) = (self.items[host as usize], self.items[aux as usize]);
        let spine = c.nodes[h.node as usize].spine;
        let cell = if spine {
            [x.cell[0], h.cell[1], h.cell[2], x.cell[3]]
        } else {
            let r = x.cell[3];
            [x.cell[0], r, r, r]
        };
        let (p, a) = if c.dim == 0 {
            (0, 0)
        } else {
            let fired = rules::adjoin(
                Counters {
                    passive: self.pool.get(h.passive),
                    active: self.pool.get(h.active),
                },
                Counters {
                    passive: self.pool.get(x.passive),
                    active: self.pool.get(x.active),
                },
                spine,
                self.rec.options.variants,
                &mut self.buf_p,
                &mut self.buf_a,
            );
            if !fired {
                return;
            }
            (self.pool.intern(&self.buf_p), self.pool.intern(&self.buf_a))
        };
        let just = if spine {
            Justification::Case5a { host, aux }
        } else {
            Justification::Case5b { host, aux }
        };
        self.add(
            RawItem {
                cell,
                top: true,
                node: h.node,
                passive: p,
                active: a,
            },
            just,
        );
    }

    /// Whether an initial root with a start label sits in `T[0,n,n,n]`
    /// with both counters zero.
    pub fn accepts(&self) -> bool {
        !self.accepting_items().is_empty()
    }

    pub fn accepting_items(&self) -> Vec<ItemId> {
        let n = self.cur as u8;
        self.compiled()
            .accepting_roots
            .iter()
            .filter_map(|&root| {
                let key = RawItem {
                    cell: [0, n, n, n],
                    top: true,
                    node: root,
                    passive: 0,
                    active: 0,
                };
                self.lookup_id(&key)
            })
            .collect()
    }

    /// Start token-by-token recognition of inputs up to `max_n` tokens,
    /// pruning as for an input of `prune_n` tokens.
    ///
    /// Every rule concludes an item whose right boundary is the largest
    /// right boundary among its premises, so the items ending at or before
    /// boundary `m` depend only on the first `m` tokens. Foot items for
    /// every gap up to `max_n` are seeded here, once. After
    /// [`Chart::push`]ing a string token by token, the items ending at or
    /// before its length are exactly those [`Chart::run`] derives for it
    /// (given the same pruning length); [`Chart::pop`] undoes a push.
    pub fn begin(&mut self, max_n: usize, prune_n: usize) -> Result<(), RecognizeError> {
        if max_n > u8::MAX as usize - 1 {
            return Err(RecognizeError::InputTooLong(max_n));
        }
        self.reset(max_n);
        self.prune_n = prune_n;
        self.cur = 0;
        self.init_feet();
        self.seed_boundary(0);
        self.saturate()
    }

    /// Extend the input by one token; returns whether the extended input
    /// is accepted.
    pub fn push(&mut self, token: u32) -> Result<bool, RecognizeError> {
        assert!(self.cur < self.n, "chart capacity exceeded");
        self.checkpoints
            .push((self.items.len(), self.index_log.len(), self.pruned));
        let c = self.compiled();
        let pos = self.cur;
        let m = (pos + 1) as u8;
        if token != NONE {
            for &anchor in &c.anchors_by_terminal[token as usize] {
                let key = RawItem {
                    cell: [pos as u8, m, m, m],
                    top: true,
                    node: anchor,
                    passive: 0,
                    active: c.nodes[anchor as usize].active,
                };
                self.add(key, Justification::Init);
            }
        }
        self.cur = pos + 1;
        self.seed_boundary(pos + 1);
        self.saturate()?;
        Ok(self.accepts())
    }

    /// Undo the last [`Chart::push`].
    pub fn pop(&mut self) {
        let (items_len, log_len, pruned) = self.checkpoints.pop().expect("pop without push");
        while self.index_log.len() > log_len {
            let id = self.index_log.pop().unwrap();
            self.unindex(id);
        }
        if self.dense.is_empty() {
            for it in &self.items[items_len..] {
                self.lookup.remove(it);
            }
        } else {
            for id in items_len..self.items.len() {
                let slot = self.dense_slot(&self.items[id]);
                self.dense[slot] = NONE;
            }
        }
        self.items.truncate(items_len);
        self.justs.truncate(items_len.min(self.justs.len()));
        self.next_start.truncate(items_len);
        self.next_end.truncate(items_len);
        self.next_host.truncate(items_len);
        self.next_aux.truncate(items_len);
        self.agenda.clear();
        self.over_budget = false;
        self.pruned = pruned;
        self.cur -= 1;
    }

    /// Epsilon leaves at boundary `m`.
    fn seed_boundary(&mut self, m: usize) {
        let c = self.compiled();
        let b = m as u8;
        for &eps in &c.epsilons {
            let key = RawItem {
                cell: [b, b, b, b],
                top: true,
                node: eps,
                passive: 0,
                active: c.nodes[eps as usize].active,
            };
            self.add(key, Justification::Init);
        }
    }

    /// Remove an item from the head of every index list it was put on.
    /// Only valid for the most recently indexed item.
    fn unindex(&mut self, id: u32) {
        let c = self.compiled();
        let it = self.items[id as usize];
        let node = &c.nodes[it.node as usize];
        let w = self.w();
        let [i, j, k, l] = it.cell.map(usize::from);
        let from_top = self.rec.options.variants.adjoin_from_top;
        let drop = |head: &mut [u32], next: &[u32], key: usize| {
            debug_assert_eq!(head[key], id);
            head[key] = next[id as usize];
        };
        if it.top {
            if node.parent != NONE {
                drop(
                    &mut self.head_start,
                    &self.next_start,
                    it.node as usize * w + i,
                );
                drop(&mut self.head_end, &self.next_end, it.node as usize * w + l);
            } else if c.trees[node.tree as usize].auxiliary {
                drop(
                    &mut self.head_aux,
                    &self.next_aux,
                    (node.label as usize * w + j) * w + k,
                );
            }
        }
        if it.top == from_top && !node.null {
            drop(
                &mut self.head_host,
                &self.next_host,
                (node.label as usize * w + i) * w + l,
            );
        }
    }

    /// Reset, seed and saturate for the given token ids.
    pub fn run(&mut self, tokens: &[u32]) -> Result<bool, RecognizeError> {
        if tokens.len() > u8::MAX as usize - 1 {
            return Err(RecognizeError::InputTooLong(tokens.len()));
        }
        self.reset(tokens.len());
        self.init_leaves(tokens);
        self.init_feet();
        self.saturate()?;
        Ok(self.accepts())
    }

    pub fn stats(&self) -> ChartStats {
        let mut cells: Vec<[u8; 4]> = self.items.iter().map(|i| i.cell).collect();
        cells.sort_unstable();
        cells.dedup();
        ChartStats {
            items: self.items.len(),
            cells: cells.len(),
            pruned: self.pruned,
        }
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn cell(&self, id: ItemId) -> CellIndex {
        CellIndex::from_raw(self.items[id as usize].cell)
    }

    pub fn item(&self, id: ItemId) -> ChartItem {
        let it = self.items[id as usize];
        let fp = self.compiled().fingerprint;
        ChartItem {
            node: self.compiled().nodes[it.node as usize].addr.clone(),
            version: if it.top {
                Version::Top
            } else {
                Version::Bottom
            },
            passive: LinkCounter::from_raw(fp, self.pool.get(it.passive)),
            active: LinkCounter::from_raw(fp, self.pool.get(it.active)),
        }
    }

    pub fn items(&self) -> impl Iterator<Item = (ItemId, CellIndex, ChartItem)> + '_ {
        (0..self.items.len() as u32).map(move |id| (id, self.cell(id), self.item(id)))
    }

    /// Look up an item; `None` if the chart does not contain it.
    pub fn find(&self, cell: CellIndex, item: &ChartItem) -> Option<ItemId> {
        let c = self.compiled();
        let node = *c.by_address.get(&item.node)?;
        let passive = *self.pool.map.get(item.passive.as_slice())?;
        let active = *self.pool.map.get(item.active.as_slice())?;
        let key = RawItem {
            cell: [cell.i, cell.j, cell.k, cell.l].map(|x| x as u8),
            top: item.version == Version::Top,
            node,
            passive,
            active,
        };
        self.lookup_id(&key)
    }

    /// Back pointers of an item (empty when recording is disabled).
    pub fn justifications(&self, id: ItemId) -> &[Justification] {
        self.justs
            .get(id as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    fn describe(&self, id: ItemId, out: &mut String) {
        let it = self.items[id as usize];
        let node = &self.compiled().nodes[it.node as usize];
        let [i, j, k, l] = it.cell;
        let _ = write!(
            out,
            "({i},{j},{k},{l} {} {}",
            node.addr,
            if it.top { 'T' } else { 'B' }
        );
        if self.compiled().dim > 0 {
            out.push(' ');
            let _ = write_counts(out, self.pool.get(it.passive));
            out.push(' ');
            let _ = write_counts(out, self.pool.get(it.active));
        }
        out.push(')');
    }

    /// One tab-separated line per item:
    /// `i j k l node T|B passive active justifications`, sorted.
    pub fn dump(&self) -> String {
        let mut rows: Vec<((usize, usize, usize, usize), String)> =
            Vec::with_capacity(self.items.len());
        for id in 0..self.items.len() as u32 {
            let it = self.items[id as usize];
            let node = &self.compiled().nodes[it.node as usize];
            let [i, j, k, l] = it.cell.map(usize::from);
            let mut line = format!(
                "{i}\t{j}\t{k}\t{l}\t{}\t{}\t",
                node.addr,
                if it.top { 'T' } else { 'B' }
            );
            let _ = write_counts(&mut line, self.pool.get(it.passive));
            line.push('\t');
            let _ = write_counts(&mut line, self.pool.get(it.active));
            line.push('\t');
            let mut justs: Vec<String> = self
                .justifications(id)
                .iter()
                .map(|jst| {
                    let mut s = jst.tag().to_string();
                    for a in jst.antecedents() {
                        self.describe(a, &mut s);
                    }
                    s
                })
                .collect();
            justs.sort();
            line.push_str(&justs.join("; "));
            rows.push(((i, j, k, l), line));
        }
        rows.sort();
        let mut out = String::new();
        for (_, line) in rows {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}
