//! Text format for decision trees.
//!
//! ```text
//! dtree 1
//! vars 2
//! root 3
//! nodes 4
//! 0 leaf 0
//! 1 leaf 1
//! 2 node 2 0 1
//! 3 node 1 0 2
//! ```
//!
//! Node ids are listed densely from 0. `node <var> <zero> <one>` uses a
//! 1-based variable index. Blank lines and lines starting with `#` are
//! ignored. Shared nodes stay shared: the table is written as stored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tree::{DecisionTree, Node, NodeId};

pub const FORMAT_VERSION: u32 = 1;

pub fn serialize(tree: &DecisionTree) -> String {
    let mut out = String::new();
    let nodes = tree.nodes();
    writeln!(out, "dtree {FORMAT_VERSION}").unwrap();
    writeln!(out, "vars {}", tree.num_vars()).unwrap();
    writeln!(out, "root {}", tree.root().0).unwrap();
    writeln!(out, "nodes {}", nodes.len()).unwrap();
    for (i, node) in nodes.iter().enumerate() {
        match *node {
            Node::Leaf(b) => writeln!(out, "{i} leaf {}", b as u8).unwrap(),
            Node::Inner { var, zero, one } => {
                writeln!(out, "{i} node {} {} {}", var + 1, zero.0, one.0).unwrap()
            }
        }
    }
    out
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    /// Whitespace-separated tokens with their 1-based columns.
    fn tokens(&self) -> Vec<(usize, &'a str)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, c) in self.text.char_indices() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    out.push((s + 1, &self.text[s..i]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s + 1, &self.text[s..]));
        }
        out
    }

    fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::parse(self.number, column, message)
    }

    fn number<T: std::str::FromStr>(&self, token: (usize, &str), what: &str) -> Result<T> {
        token
            .1
            .parse()
            .map_err(|_| self.error(token.0, format!("expected {what}, found {:?}", token.1)))
    }

    /// Parses `<keyword> <value>`.
    fn keyed<T: std::str::FromStr>(&self, keyword: &str) -> Result<T> {
        let toks = self.tokens();
        match toks.as_slice() {
            [(_, k), v] if *k == keyword => self.number(*v, keyword),
            [(c, k), ..] if *k != keyword => {
                Err(self.error(*c, format!("expected `{keyword}`, found {k:?}")))
            }
            _ => Err(self.error(1, format!("expected `{keyword} <value>`"))),
        }
    }
}

pub fn deserialize(text: &str) -> Result<DecisionTree> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, t)| Line {
            number: i + 1,
            text: t,
        })
        .filter(|l| {
            let t = l.text.trim();
            !t.is_empty() && !t.starts_with('#')
        });
    let eof = |what: &str| {
        Error::parse(
            text.lines().count() + 1,
            1,
            format!("unexpected end of input, expected {what}"),
        )
    };

    let header = lines.next().ok_or_else(|| eof("header"))?;
    let version: u32 = header.keyed("dtree")?;
    if version != FORMAT_VERSION {
        return Err(header.error(7, format!("unsupported version {version}")));
    }
    let vars_line = lines.next().ok_or_else(|| eof("`vars`"))?;
    let num_vars: usize = vars_line.keyed("vars")?;
    let root_line = lines.next().ok_or_else(|| eof("`root`"))?;
    let root: u32 = root_line.keyed("root")?;
    let count_line = lines.next().ok_or_else(|| eof("`nodes`"))?;
    let count: usize = count_line.keyed("nodes")?;

    let mut nodes = Vec::with_capacity(count);
    for expected in 0..count {
        let line = lines.next().ok_or_else(|| eof("node entry"))?;
        let toks = line.tokens();
        let id: usize = line.number(toks[0], "node id")?;
        if id != expected {
            return Err(line.error(
                toks[0].0,
                format!("expected node id {expected}, found {id}"),
            ));
        }
        let node = match toks.get(1) {
            Some(&(_, "leaf")) => {
                if toks.len() != 3 {
                    return Err(line.error(1, "expected `<id> leaf <0|1>`"));
                }
                match toks[2].1 {
                    "0" => Node::Leaf(false),
                    "1" => Node::Leaf(true),
                    other => {
                        return Err(line.error(
                            toks[2].0,
                            format!("leaf label must be 0 or 1, found {other:?}"),
                        ))
                    }
                }
            }
            Some(&(_, "node")) => {
                if toks.len() != 5 {
                    return Err(line.error(1, "expected `<id> node <var> <zero> <one>`"));
                }
                let var: u32 = line.number(toks[2], "variable index")?;
                if var == 0 || var as usize > num_vars {
                    return Err(line.error(
                        toks[2].0,
                        format!("variable index {var} outside 1..={num_vars}"),
                    ));
                }
                let zero: u32 = line.number(toks[3], "child id")?;
                let one: u32 = line.number(toks[4], "child id")?;
                for (tok, child) in [(toks[3], zero), (toks[4], one)] {
                    if child as usize >= count {
                        return Err(line.error(tok.0, format!("child {child} is not a node id")));
                    }
                }
                Node::Inner {
                    var: var - 1,
                    zero: NodeId(zero),
                    one: NodeId(one),
                }
            }
            Some(&(c, other)) => {
                return Err(line.error(c, format!("expected `leaf` or `node`, found {other:?}")))
            }
            None => return Err(line.error(1, "missing node kind")),
        };
        nodes.push(node);
    }
    if let Some(extra) = lines.next() {
        return Err(extra.error(1, "trailing content after node table"));
    }
    if root as usize >= count {
        return Err(root_line.error(6, format!("root {root} is not a node id")));
    }
    DecisionTree::from_parts(num_vars, nodes, NodeId(root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::random_tree;
    use crate::tree::tests::and2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn leaf_document_is_minimal() {
        let t = DecisionTree::leaf(1, true);
        assert_eq!(
            serialize(&t),
            "dtree 1\nvars 1\nroot 0\nnodes 1\n0 leaf 1\n"
        );
    }

    #[test]
    fn conjunction_document() {
        let text = serialize(&and2());
        assert_eq!(
            text,
            "dtree 1\nvars 2\nroot 3\nnodes 4\n0 leaf 0\n1 leaf 1\n2 node 2 0 1\n3 node 1 0 2\n"
        );
        let back = deserialize(&text).unwrap();
        assert_eq!(back.nodes(), and2().nodes());
    }

    #[test]
    fn round_trip_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..100 {
            let t = random_tree(&mut rng, 6, 7, i % 2 == 0);
            let back = deserialize(&serialize(&t)).unwrap();
            assert_eq!(back.nodes(), t.nodes());
            assert_eq!(back.root(), t.root());
            for bits in 0..64u32 {
                let x: Vec<bool> = (0..6).map(|k| bits >> k & 1 == 1).collect();
                assert_eq!(back.eval_complete(&x), t.eval_complete(&x));
            }
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a tree\n\ndtree 1\nvars 1\nroot 0\nnodes 1\n# leaf\n0 leaf 0\n";
        assert!(deserialize(text).is_ok());
    }

    fn err_pos(text: &str) -> (usize, usize) {
        match deserialize(text).unwrap_err() {
            Error::Parse { line, column, .. } => (line, column),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(err_pos("dtree 2\n"), (1, 7));
        assert_eq!(err_pos("dtree 1\nvar 1\n"), (2, 1));
        assert_eq!(
            err_pos("dtree 1\nvars 1\nroot 0\nnodes 1\n0 leaf 2\n"),
            (5, 8)
        );
        assert_eq!(
            err_pos("dtree 1\nvars 1\nroot 0\nnodes 1\n0 node 2 0 0\n"),
            (5, 8)
        );
        assert_eq!(
            err_pos("dtree 1\nvars 1\nroot 0\nnodes 1\n0 node 1 0 7\n"),
            (5, 12)
        );
        assert_eq!(
            err_pos("dtree 1\nvars 1\nroot 0\nnodes 2\n0 leaf 1\n"),
            (6, 1)
        );
        assert_eq!(
            err_pos("dtree 1\nvars 1\nroot 0\nnodes 1\n1 leaf 1\n"),
            (5, 1)
        );
    }

    #[test]
    fn cyclic_table_is_a_structure_error() {
        let text = "dtree 1\nvars 1\nroot 0\nnodes 2\n0 node 1 1 1\n1 node 1 0 0\n";
        assert!(matches!(deserialize(text), Err(Error::Structure(_))));
    }
}
