use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Grammar, LabelKind, NodeKind, TreeKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    NotLexicalized,
    AuxiliaryWithoutFoot,
    MultipleFeet,
    FootRootMismatch,
    InitialWithFoot,
    LinkSourceNotFoot,
    LinkWithinOneTree,
    LabelKindMisplaced,
    MalformedNode,
    LeafAdmitsAdjunction,
    UnknownSelectiveTree,
    /// Warning: a tree that shares no link with the rest of its set.
    NotLinkConnected,
    /// Warning: more links than a spanning tree of the set's trees needs.
    RedundantLinkCycle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, kind: DiagnosticKind, message: String) {
        self.errors.push(Diagnostic { kind, message });
    }

    fn warn(&mut self, kind: DiagnosticKind, message: String) {
        self.warnings.push(Diagnostic { kind, message });
    }
}

pub fn validate(grammar: &Grammar) -> ValidationReport {
    let mut r = ValidationReport::default();
    let aux_ids: BTreeSet<&str> = grammar
        .trees()
        .filter(|(_, t)| t.is_auxiliary())
        .map(|(_, t)| t.id.as_str())
        .collect();

    for set in grammar.sets() {
        if !set.trees.iter().any(|t| t.has_anchor()) {
            r.error(
                DiagnosticKind::NotLexicalized,
                format!("set not lexicalized: {}", set.id),
            );
        }
        for tree in &set.trees {
            let feet: Vec<_> = tree.root.walk().filter(|n| n.is_foot()).collect();
            match (tree.kind, feet.len()) {
                (TreeKind::Auxiliary, 0) => r.error(
                    DiagnosticKind::AuxiliaryWithoutFoot,
                    format!("auxiliary tree {} has no foot node", tree.id),
                ),
                (TreeKind::Auxiliary, 1) => {
                    if feet[0].label.name != tree.root.label.name {
                        r.error(
                            DiagnosticKind::FootRootMismatch,
                            format!(
                                "foot/root label mismatch in {}: root {} foot {}",
                                tree.id, tree.root.label, feet[0].label
                            ),
                        );
                    }
                }
                (TreeKind::Auxiliary, _) => r.error(
                    DiagnosticKind::MultipleFeet,
                    format!("auxiliary tree {} has {} foot nodes", tree.id, feet.len()),
                ),
                (TreeKind::Initial, 0) => {}
                (TreeKind::Initial, _) => r.error(
                    DiagnosticKind::InitialWithFoot,
                    format!("initial tree {} has a foot node", tree.id),
                ),
            }
            for node in tree.root.walk() {
                let leaf = node.kind != NodeKind::Internal;
                if leaf != node.children.is_empty() {
                    r.error(
                        DiagnosticKind::MalformedNode,
                        format!(
                            "{}: {:?} node with {} children",
                            node.address,
                            node.kind,
                            node.children.len()
                        ),
                    );
                }
                let terminal = node.label.kind == LabelKind::Terminal;
                if terminal != (node.kind == NodeKind::Anchor) {
                    r.error(
                        DiagnosticKind::LabelKindMisplaced,
                        format!(
                            "{}: label {} misplaced on {:?} node",
                            node.address, node.label, node.kind
                        ),
                    );
                }
                if leaf && !node.constraint.is_null() {
                    r.error(
                        DiagnosticKind::LeafAdmitsAdjunction,
                        format!("{}: leaf nodes never admit adjunction", node.address),
                    );
                }
                for id in &node.constraint.allowed {
                    if !aux_ids.contains(id.as_str()) {
                        r.error(
                            DiagnosticKind::UnknownSelectiveTree,
                            format!(
                                "{}: selective constraint names unknown auxiliary tree {id}",
                                node.address
                            ),
                        );
                    }
                }
            }
        }

        for link in &set.links {
            if !grammar.node(&link.source).is_some_and(|n| n.is_foot()) {
                r.error(
                    DiagnosticKind::LinkSourceNotFoot,
                    format!("link source is not a foot node: {}", link.source),
                );
            }
            if link.source.tree == link.target.tree {
                r.error(
                    DiagnosticKind::LinkWithinOneTree,
                    format!(
                        "link {} relates two nodes of tree {}",
                        link.id, link.source.tree
                    ),
                );
            }
        }

        // Connectivity of the set's trees under links (union-find).
        if set.trees.len() > 1 {
            let pos: BTreeMap<&str, usize> = set
                .trees
                .iter()
                .enumerate()
                .map(|(i, t)| (t.id.as_str(), i))
                .collect();
            let mut parent: Vec<usize> = (0..set.trees.len()).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut x = x;
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            let mut cycles = 0;
            for link in &set.links {
                let (Some(&a), Some(&b)) = (
                    pos.get(link.source.tree.as_str()),
                    pos.get(link.target.tree.as_str()),
                ) else {
                    continue;
                };
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    if a != b {
                        cycles += 1;
                    }
                } else {
                    parent[ra] = rb;
                }
            }
            let anchor_root = set.trees.iter().position(|t| t.has_anchor()).unwrap_or(0);
            let main = find(&mut parent, anchor_root);
            for (i, tree) in set.trees.iter().enumerate() {
                if find(&mut parent, i) != main {
                    r.warn(
                        DiagnosticKind::NotLinkConnected,
                        format!(
                            "tree {} not link-connected to the rest of set {}",
                            tree.id, set.id
                        ),
                    );
                }
            }
            if cycles > 0 {
                r.warn(
                    DiagnosticKind::RedundantLinkCycle,
                    format!(
                        "set {} has {cycles} link(s) closing a cycle; counter-based recognition may pair them across set instances",
                        set.id
                    ),
                );
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{
        load_grammar, AdjConstraint, Grammar, LinkSpec, NodeAddress, TreeSetSpec,
    };

    fn errs(text: &str) -> Vec<DiagnosticKind> {
        validate(&load_grammar(text).unwrap())
            .errors
            .into_iter()
            .map(|d| d.kind)
            .collect()
    }

    #[test]
    fn unanchored_set_is_not_lexicalized() {
        let g = load_grammar("set s { tree a initial : (S (eps)) }").unwrap();
        let r = validate(&g);
        assert_eq!(r.errors[0].kind, DiagnosticKind::NotLexicalized);
        assert!(r.errors[0].message.contains("set not lexicalized"));
    }

    #[test]
    fn foot_root_mismatch() {
        let r =
            validate(&load_grammar("set s { tree b auxiliary : (VP \"v\" (NP! foot)) }").unwrap());
        assert!(r
            .errors
            .iter()
            .any(|d| d.message.contains("foot/root label mismatch")));
    }

    #[test]
    fn foot_count_errors() {
        assert_eq!(
            errs("set s { tree b auxiliary : (S \"v\") }"),
            vec![DiagnosticKind::AuxiliaryWithoutFoot]
        );
        assert_eq!(
            errs("set s { tree b initial : (S \"v\" (S! foot)) }"),
            vec![DiagnosticKind::InitialWithFoot]
        );
        assert_eq!(
            errs("set s { tree b auxiliary : (S \"v\" (S! foot) (S! foot)) }"),
            vec![DiagnosticKind::MultipleFeet]
        );
    }

    #[test]
    fn unlinked_set_member_warns() {
        let g = load_grammar(
            "set s {\n tree ainit initial : (S \"a\")\n tree baux auxiliary : (S \"b\" (S! foot))\n}",
        )
        .unwrap();
        let r = validate(&g);
        assert!(r.is_valid());
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0]
            .message
            .contains("tree baux not link-connected"));
    }

    #[test]
    fn programmatic_link_from_internal_node() {
        let set = "s";
        let a = NodeAddress::root(set, "a");
        let b = NodeAddress::root(set, "b");
        let tree_a = crate::grammar::ElementaryTree {
            id: "a".into(),
            kind: TreeKind::Initial,
            root: crate::grammar::TreeNode::internal(
                a.clone(),
                "S",
                vec![crate::grammar::TreeNode::leaf(
                    a.child(1),
                    crate::grammar::Label::terminal("x"),
                    NodeKind::Anchor,
                )],
            ),
        };
        let tree_b = crate::grammar::ElementaryTree {
            id: "b".into(),
            kind: TreeKind::Auxiliary,
            root: crate::grammar::TreeNode::internal(
                b.clone(),
                "S",
                vec![
                    crate::grammar::TreeNode::internal(
                        b.child(1),
                        "T",
                        vec![crate::grammar::TreeNode::leaf(
                            b.child(1).child(1),
                            crate::grammar::Label::terminal("y"),
                            NodeKind::Anchor,
                        )],
                    )
                    .with_constraint(AdjConstraint::any()),
                    crate::grammar::TreeNode::leaf(
                        b.child(2),
                        crate::grammar::Label::nonterminal("S"),
                        NodeKind::Foot,
                    ),
                ],
            ),
        };
        let g = Grammar::new(
            vec![TreeSetSpec {
                id: set.into(),
                trees: vec![tree_a, tree_b],
                links: vec![LinkSpec {
                    source: b.child(1),
                    target: a.clone(),
                }],
            }],
            Vec::new(),
        )
        .unwrap();
        let before = g.clone();
        let r = validate(&g);
        assert!(r
            .errors
            .iter()
            .any(|d| d.kind == DiagnosticKind::LinkSourceNotFoot));
        assert_eq!(g, before);
    }
}
