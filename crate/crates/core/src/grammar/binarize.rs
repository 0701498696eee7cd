//! Conversion to extended two form (every node has at most two children).

use super::{AdjConstraint, Grammar, NodeKind, TreeNode};

fn binarize_node(mut node: TreeNode) -> TreeNode {
    let children: Vec<TreeNode> = std::mem::take(&mut node.children)
        .into_iter()
        .map(binarize_node)
        .collect();
    node.children = fold_children(&node, children);
    node
}

/// Right fold: ⟨c1, c2, ..., cm⟩ becomes ⟨c1, F(c2, ..., cm)⟩ with F fresh.
fn fold_children(parent: &TreeNode, mut children: Vec<TreeNode>) -> Vec<TreeNode> {
    if children.len() <= 2 {
        return children;
    }
    let rest = children.split_off(1);
    let fresh_addr = parent.address.fresh();
    let mut fresh = TreeNode {
        address: fresh_addr,
        label: parent.label.clone(),
        kind: NodeKind::Internal,
        constraint: AdjConstraint::null(),
        active_reqs: Vec::new(),
        passive_reqs: Vec::new(),
        children: Vec::new(),
    };
    fresh.children = fold_children(&fresh, rest);
    children.push(fresh);
    children
}

/// Return the grammar in extended two form. Original nodes keep their
/// addresses; inserted nodes copy the parent's label, never admit adjunction
/// and carry no requirements.
pub fn binarize(grammar: &Grammar) -> Grammar {
    if grammar.is_two_form() {
        return grammar.clone();
    }
    let mut specs = grammar.to_specs();
    for set in &mut specs {
        for tree in &mut set.trees {
            let placeholder = TreeNode::leaf(
                tree.root.address.clone(),
                tree.root.label.clone(),
                NodeKind::Epsilon,
            );
            let root = std::mem::replace(&mut tree.root, placeholder);
            tree.root = binarize_node(root);
        }
    }
    Grammar::new(specs, grammar.start_labels().iter().cloned())
        .expect("binarization preserves identifiers and link endpoints")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{load_grammar, AdjMode, NodeAddress};

    #[test]
    fn ternary_node_folds_right() {
        let g = load_grammar("set s { tree a initial : (S \"x\" \"y\" \"z\") }").unwrap();
        let b = binarize(&g);
        let (_, t) = b.tree("a").unwrap();
        assert_eq!(t.root.children.len(), 2);
        assert_eq!(t.root.children[0].label.name, "x");
        let fresh = &t.root.children[1];
        assert_eq!(fresh.label.name, "S");
        assert_eq!(fresh.constraint.mode, AdjMode::Null);
        assert!(fresh.address.is_fresh());
        assert_eq!(
            fresh.children[0].address,
            NodeAddress::root("s", "a").child(2)
        );
        assert_eq!(
            fresh.children[1].address,
            NodeAddress::root("s", "a").child(3)
        );
    }

    #[test]
    fn binary_grammar_is_unchanged() {
        let g = load_grammar("set s { tree a initial : (S \"x\" (T \"y\" \"z\")) }").unwrap();
        assert_eq!(binarize(&g), g);
    }

    #[test]
    fn idempotent_and_keeps_links() {
        let g = load_grammar(
            "set s { tree a initial : (S \"a\" \"b\" \"c\" \"d\")\n tree b auxiliary : (S \"p\" (S! foot) \"q\" \"r\")\n \
             link b@2 -> a@4 }",
        )
        .unwrap();
        let once = binarize(&g);
        assert!(once.is_two_form());
        assert_eq!(binarize(&once), once);
        assert_eq!(once.fingerprint(), g.fingerprint());
        let target = NodeAddress::root("s", "a").child(4);
        assert_eq!(
            once.node_requirements(&target).unwrap(),
            g.node_requirements(&target).unwrap()
        );
    }
}
