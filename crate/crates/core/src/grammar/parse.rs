//! Reader for the textual grammar format.
//!
//! ```text
//! start S
//! set <set-id> {
//!   tree <tree-id> initial|auxiliary : <bracketed-tree>
//!   link <tree-id>@<gorn> -> <tree-id>@<gorn>
//! }
//! ```

use std::collections::BTreeSet;

use super::{
    AdjConstraint, AdjMode, ElementaryTree, Grammar, GrammarError, Label, LinkSpec, NodeAddress,
    NodeKind, TreeKind, TreeNode, TreeSetSpec,
};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Open,
    Close,
    LBrace,
    RBrace,
    Colon,
    Arrow,
    Newline,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> GrammarError {
    GrammarError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | '"' | '#' | ':') && c != '{' && c != '}'
}

fn lex(text: &str) -> Result<Vec<Spanned>, GrammarError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let lineno = li + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            match c {
                '#' => break,
                c if c.is_whitespace() => i += 1,
                '(' => {
                    out.push(Spanned {
                        tok: Tok::Open,
                        line: lineno,
                        column: col,
                    });
                    i += 1;
                }
                ')' => {
                    out.push(Spanned {
                        tok: Tok::Close,
                        line: lineno,
                        column: col,
                    });
                    i += 1;
                }
                '{' => {
                    out.push(Spanned {
                        tok: Tok::LBrace,
                        line: lineno,
                        column: col,
                    });
                    i += 1;
                }
                '}' => {
                    out.push(Spanned {
                        tok: Tok::RBrace,
                        line: lineno,
                        column: col,
                    });
                    i += 1;
                }
                ':' => {
                    out.push(Spanned {
                        tok: Tok::Colon,
                        line: lineno,
                        column: col,
                    });
                    i += 1;
                }
                '"' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && chars[j] != '"' {
                        j += 1;
                    }
                    if j == chars.len() {
                        return Err(syntax(lineno, col, "unterminated terminal string"));
                    }
                    let s: String = chars[start..j].iter().collect();
                    if s.is_empty() || s.chars().any(char::is_whitespace) {
                        return Err(syntax(lineno, col, "terminal must be a non-empty word"));
                    }
                    out.push(Spanned {
                        tok: Tok::Quoted(s),
                        line: lineno,
                        column: col,
                    });
                    i = j + 1;
                }
                _ => {
                    let start = i;
                    // `!sa{a,b}` keeps its braces inside the word.
                    let mut depth = 0usize;
                    while i < chars.len() {
                        let ch = chars[i];
                        if ch == '{' && i > start && chars[start..i].contains(&'!') {
                            depth += 1;
                        } else if ch == '}' && depth > 0 {
                            depth -= 1;
                        } else if depth == 0 && !is_word_char(ch) {
                            break;
                        }
                        i += 1;
                    }
                    let w: String = chars[start..i].iter().collect();
                    if w == "->" {
                        out.push(Spanned {
                            tok: Tok::Arrow,
                            line: lineno,
                            column: col,
                        });
                    } else {
                        out.push(Spanned {
                            tok: Tok::Word(w),
                            line: lineno,
                            column: col,
                        });
                    }
                }
            }
        }
        out.push(Spanned {
            tok: Tok::Newline,
            line: lineno,
            column: chars.len() + 1,
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(s) => (s.line, s.column),
            None => (1, 1),
        }
    }

    fn err(&self, message: impl Into<String>) -> GrammarError {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn skip_newlines(&mut self) {
        while matches!(
            self.peek(),
            Some(Spanned {
                tok: Tok::Newline,
                ..
            })
        ) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), GrammarError> {
        match self.peek() {
            Some(s) if s.tok == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn word(&mut self, what: &str) -> Result<String, GrammarError> {
        match self.peek() {
            Some(Spanned {
                tok: Tok::Word(w), ..
            }) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn end_of_line(&mut self) -> Result<(), GrammarError> {
        match self.peek() {
            None => Ok(()),
            Some(Spanned {
                tok: Tok::Newline, ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            Some(Spanned {
                tok: Tok::RBrace, ..
            }) => Ok(()),
            _ => Err(self.err("unexpected trailing input")),
        }
    }

    fn tree(&mut self, addr: NodeAddress) -> Result<TreeNode, GrammarError> {
        let head = self.next().ok_or_else(|| self.err("expected tree"))?;
        match head.tok {
            Tok::Quoted(t) => Ok(TreeNode::leaf(addr, Label::terminal(t), NodeKind::Anchor)),
            Tok::Open => {
                let (line, column) = self.here();
                let word = self.word("node label")?;
                if word == "eps" {
                    self.expect(Tok::Close, "`)` after eps")?;
                    return Ok(TreeNode::leaf(
                        addr,
                        Label::nonterminal("eps"),
                        NodeKind::Epsilon,
                    ));
                }
                let mut parts = word.split('!');
                let label = parts.next().unwrap_or_default().to_string();
                if label.is_empty() {
                    return Err(syntax(line, column, "empty node label"));
                }
                let mods: Vec<&str> = parts.collect();
                if mods == [""] {
                    let form = self.word("`foot` or `subst`")?;
                    let kind = match form.as_str() {
                        "foot" => NodeKind::Foot,
                        "subst" => NodeKind::SubstSlot,
                        other => {
                            return Err(syntax(
                                line,
                                column,
                                format!("unknown leaf form `{other}`"),
                            ))
                        }
                    };
                    self.expect(Tok::Close, "`)`")?;
                    return Ok(TreeNode::leaf(addr, Label::nonterminal(label), kind));
                }
                let constraint = parse_modifiers(&mods).map_err(|m| syntax(line, column, m))?;
                let mut children = Vec::new();
                loop {
                    match self.peek() {
                        Some(Spanned {
                            tok: Tok::Close, ..
                        }) => {
                            self.pos += 1;
                            break;
                        }
                        Some(Spanned {
                            tok: Tok::Open | Tok::Quoted(_),
                            ..
                        }) => {
                            let child_addr = addr.child(children.len() as u32 + 1);
                            children.push(self.tree(child_addr)?);
                        }
                        _ => return Err(self.err("expected child tree or `)`")),
                    }
                }
                if children.is_empty() {
                    return Err(syntax(line, column, "internal node without children"));
                }
                Ok(TreeNode::internal(addr, &label, children).with_constraint(constraint))
            }
            _ => Err(syntax(head.line, head.column, "expected `(` or terminal")),
        }
    }
}

fn parse_modifiers(mods: &[&str]) -> Result<AdjConstraint, String> {
    let mut c = AdjConstraint::any();
    let mut obligatory = false;
    let mut selection: Option<BTreeSet<String>> = None;
    for m in mods {
        if *m == "na" {
            c.mode = AdjMode::Null;
        } else if *m == "oa" {
            obligatory = true;
        } else if let Some(rest) = m.strip_prefix("sa{").and_then(|r| r.strip_suffix('}')) {
            let set: BTreeSet<String> = rest
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            if set.is_empty() {
                return Err("empty selective adjunction set".into());
            }
            selection = Some(set);
        } else {
            return Err(format!("unknown modifier `!{m}`"));
        }
    }
    if c.mode == AdjMode::Null {
        if obligatory || selection.is_some() {
            return Err("`!na` cannot be combined with other modifiers".into());
        }
        return Ok(c);
    }
    if obligatory {
        c.mode = AdjMode::Obligatory;
        c.allowed = selection.unwrap_or_default();
    } else if let Some(set) = selection {
        c.mode = AdjMode::Selective;
        c.allowed = set;
    }
    Ok(c)
}

fn parse_endpoint(
    text: &str,
    set: &str,
    line: usize,
    column: usize,
) -> Result<(String, NodeAddress), GrammarError> {
    let (tree, gorn) = text
        .split_once('@')
        .ok_or_else(|| syntax(line, column, "link endpoint must be <tree-id>@<gorn>"))?;
    let mut addr = NodeAddress::root(set, tree);
    if gorn != "0" {
        for part in gorn.split('.') {
            let i: u32 = part
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| syntax(line, column, format!("bad gorn address `{gorn}`")))?;
            addr = addr.child(i);
        }
    }
    Ok((tree.to_string(), addr))
}

/// Parse a grammar document and resolve it into a [`Grammar`].
pub fn load_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut start: Vec<String> = Vec::new();
    let mut sets = Vec::new();
    loop {
        p.skip_newlines();
        let Some(tok) = p.peek().cloned() else { break };
        match tok.tok {
            Tok::Word(ref w) if w == "start" => {
                p.pos += 1;
                let mut any = false;
                while let Some(Spanned {
                    tok: Tok::Word(w), ..
                }) = p.peek().cloned()
                {
                    start.push(w);
                    p.pos += 1;
                    any = true;
                }
                if !any {
                    return Err(p.err("expected start label"));
                }
                p.end_of_line()?;
            }
            Tok::Word(ref w) if w == "set" => {
                p.pos += 1;
                sets.push(parse_set(&mut p)?);
            }
            _ => return Err(syntax(tok.line, tok.column, "expected `start` or `set`")),
        }
    }
    let grammar = Grammar::new(sets, start)?;
    for link in grammar.links() {
        if !grammar.node(&link.source).is_some_and(TreeNode::is_foot) {
            return Err(GrammarError::LinkSourceNotFoot(link.source.to_string()));
        }
    }
    Ok(grammar)
}

fn parse_set(p: &mut Parser) -> Result<TreeSetSpec, GrammarError> {
    let id = p.word("set id")?;
    p.skip_newlines();
    p.expect(Tok::LBrace, "`{`")?;
    let mut trees = Vec::new();
    let mut pending_links = Vec::new();
    loop {
        p.skip_newlines();
        let tok = p.next().ok_or_else(|| p.err("unterminated set"))?;
        match tok.tok {
            Tok::RBrace => break,
            Tok::Word(w) if w == "tree" => {
                let tid = p.word("tree id")?;
                let kind = match p.word("`initial` or `auxiliary`")?.as_str() {
                    "initial" => TreeKind::Initial,
                    "auxiliary" => TreeKind::Auxiliary,
                    other => return Err(p.err(format!("unknown tree kind `{other}`"))),
                };
                p.expect(Tok::Colon, "`:`")?;
                let root = p.tree(NodeAddress::root(&id, &tid))?;
                p.end_of_line()?;
                trees.push(ElementaryTree {
                    id: tid,
                    kind,
                    root,
                });
            }
            Tok::Word(w) if w == "link" => {
                let (line, column) = p.here();
                let from = p.word("link source")?;
                p.expect(Tok::Arrow, "`->`")?;
                let to = p.word("link target")?;
                p.end_of_line()?;
                pending_links.push((from, to, line, column));
            }
            _ => {
                return Err(syntax(
                    tok.line,
                    tok.column,
                    "expected `tree`, `link` or `}`",
                ))
            }
        }
    }
    let mut links = Vec::new();
    for (from, to, line, column) in pending_links {
        let (st, source) = parse_endpoint(&from, &id, line, column)?;
        let (tt, target) = parse_endpoint(&to, &id, line, column)?;
        for t in [&st, &tt] {
            if !trees.iter().any(|tree: &ElementaryTree| &tree.id == t) {
                return Err(GrammarError::UnresolvedEndpoint(format!("{t} in set {id}")));
            }
        }
        links.push(LinkSpec { source, target });
    }
    Ok(TreeSetSpec { id, trees, links })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{GornStep, LinkId};

    #[test]
    fn minimal_grammar() {
        let g = load_grammar("set s { tree a initial : (S \"a\") }").unwrap();
        assert_eq!(g.sets().len(), 1);
        assert!(g.links().is_empty());
        assert_eq!(g.max_links_per_set(), 0);
    }

    #[test]
    fn link_from_internal_node_is_rejected() {
        let err = load_grammar(
            "set s {\n tree a initial : (S \"x\")\n tree b auxiliary : (S (S \"y\") (S! foot))\n \
             link b@1 -> a@0\n}",
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("link source is not a foot node"),
            "{err}"
        );
    }

    #[test]
    fn modifiers_and_leaf_forms() {
        let g = load_grammar(
            "start S VP\nset s {\n  tree a initial : (S!oa!sa{b} (NP! subst) (VP!na \"v\" (eps)))\n  \
             tree b auxiliary : (S!sa{b} (S! foot) \"z\")\n}\n",
        )
        .unwrap();
        let (_, a) = g.tree("a").unwrap();
        assert_eq!(a.root.constraint.mode, AdjMode::Obligatory);
        assert!(a.root.constraint.allowed.contains("b"));
        assert_eq!(a.root.children[0].kind, NodeKind::SubstSlot);
        assert_eq!(a.root.children[1].constraint.mode, AdjMode::Null);
        assert_eq!(a.root.children[1].children[1].kind, NodeKind::Epsilon);
        let (_, b) = g.tree("b").unwrap();
        assert_eq!(b.root.constraint.mode, AdjMode::Selective);
        assert_eq!(b.foot_address().unwrap().gorn, vec![GornStep::Child(1)]);
        assert_eq!(g.start_labels().len(), 2);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = load_grammar("set s {\n  tree a initial : (S \"a\"\n}").unwrap_err();
        match err {
            GrammarError::Syntax { line, .. } => assert!(line >= 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load_grammar("set s { tree a initial : (S) }"),
            Err(GrammarError::Syntax { .. })
        ));
        assert!(matches!(
            load_grammar("bogus"),
            Err(GrammarError::Syntax {
                line: 1,
                column: 1,
                ..
            })
        ));
    }

    #[test]
    fn duplicates_and_unresolved() {
        assert!(matches!(
            load_grammar("set s { tree a initial : (S \"a\")\n tree a initial : (S \"b\") }"),
            Err(GrammarError::DuplicateId(_))
        ));
        assert!(matches!(
            load_grammar(
                "set s { tree a initial : (S \"a\") }\nset s { tree b initial : (S \"b\") }"
            ),
            Err(GrammarError::DuplicateId(_))
        ));
        assert!(matches!(
            load_grammar(
                "set s { tree a initial : (S \"a\")\n tree b auxiliary : (S (S! foot) \"b\")\n link b@1 -> a@3 }"
            ),
            Err(GrammarError::UnresolvedEndpoint(_))
        ));
        assert!(matches!(
            load_grammar(
                "set s { tree a initial : (S \"a\") }\nset t { tree b auxiliary : (S (S! foot) \"b\")\n link b@1 -> a@0 }"
            ),
            Err(GrammarError::UnresolvedEndpoint(_))
        ));
    }

    #[test]
    fn comments_are_ignored() {
        let g = load_grammar(
            "# header\nset s { # trailing\n tree a initial : (S \"a\") # done\n tree b auxiliary : (S (S! foot) \"b\")\n \
             link b@1 -> a@1\n}",
        )
        .unwrap();
        assert_eq!(g.links()[0].id, LinkId(0));
        assert_eq!(g.links()[0].target.gorn_string(), "1");
    }
}
