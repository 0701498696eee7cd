//! Canonical serializer, inverse of [`super::load_grammar`].

use std::fmt::Write;

use super::{AdjMode, Grammar, NodeKind, TreeKind, TreeNode};

fn modifiers(node: &TreeNode, out: &mut String) {
    let c = &node.constraint;
    match c.mode {
        AdjMode::Any => {}
        AdjMode::Null => out.push_str("!na"),
        AdjMode::Obligatory => {
            out.push_str("!oa");
            if !c.allowed.is_empty() {
                let list: Vec<&str> = c.allowed.iter().map(String::as_str).collect();
                let _ = write!(out, "!sa{{{}}}", list.join(","));
            }
        }
        AdjMode::Selective => {
            let list: Vec<&str> = c.allowed.iter().map(String::as_str).collect();
            let _ = write!(out, "!sa{{{}}}", list.join(","));
        }
    }
}

fn tree_into(node: &TreeNode, out: &mut String) {
    match node.kind {
        NodeKind::Anchor => {
            let _ = write!(out, "\"{}\"", node.label.name);
        }
        NodeKind::Epsilon => out.push_str("(eps)"),
        NodeKind::Foot => {
            let _ = write!(out, "({}! foot)", node.label.name);
        }
        NodeKind::SubstSlot => {
            let _ = write!(out, "({}! subst)", node.label.name);
        }
        NodeKind::Internal => {
            out.push('(');
            out.push_str(&node.label.name);
            modifiers(node, out);
            for child in &node.children {
                out.push(' ');
                tree_into(child, out);
            }
            out.push(')');
        }
    }
}

/// Bracketed-tree syntax for one (sub)tree.
pub fn render_tree(node: &TreeNode) -> String {
    let mut s = String::new();
    tree_into(node, &mut s);
    s
}

/// Serialize a grammar in canonical form: start labels sorted, then sets,
/// trees and links in declaration order.
pub fn render(grammar: &Grammar) -> String {
    let mut out = String::new();
    let start: Vec<&str> = grammar.start_labels().iter().map(String::as_str).collect();
    let _ = writeln!(out, "start {}", start.join(" "));
    for set in grammar.sets() {
        let _ = writeln!(out, "set {} {{", set.id);
        for tree in &set.trees {
            let kind = match tree.kind {
                TreeKind::Initial => "initial",
                TreeKind::Auxiliary => "auxiliary",
            };
            let _ = writeln!(
                out,
                "  tree {} {} : {}",
                tree.id,
                kind,
                render_tree(&tree.root)
            );
        }
        for link in &set.links {
            let _ = writeln!(
                out,
                "  link {}@{} -> {}@{}",
                link.source.tree,
                link.source.gorn_string(),
                link.target.tree,
                link.target.gorn_string()
            );
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::load_grammar;

    #[test]
    fn canonical_text_is_a_fixpoint() {
        let text =
            "start S\nset s {\n  tree a initial : (S!oa!sa{b} (NP! subst) (VP!na \"v\" (eps)))\n  \
                    tree b auxiliary : (S!sa{b,c} (S! foot) \"z\")\n  link b@1 -> a@2\n}\n";
        let g = load_grammar(text).unwrap();
        assert_eq!(render(&g), text);
    }
}
