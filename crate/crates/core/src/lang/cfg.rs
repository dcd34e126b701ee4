use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{FunctionDef, Line, Stmt, StmtKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfgNode<'a> {
    Entry,
    Exit,
    Stmt(&'a Stmt),
}

/// Control-flow graph of one function. Node 0 is the entry, node 1 the
/// exit, and statements follow in source order. An `If` node has two
/// successors (then, else); a `While` node has (body, after).
#[derive(Debug, Clone)]
pub struct Cfg<'a> {
    pub nodes: Vec<CfgNode<'a>>,
    pub succs: Vec<Vec<usize>>,
}

impl<'a> Cfg<'a> {
    pub const ENTRY: usize = 0;
    pub const EXIT: usize = 1;

    pub fn preds(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.nodes.len()];
        for (n, succs) in self.succs.iter().enumerate() {
            for &s in succs {
                preds[s].push(n);
            }
        }
        preds
    }

    pub fn node_of_line(&self, line: Line) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| matches!(n, CfgNode::Stmt(s) if s.line == line))
    }
}

pub fn build_cfg(f: &FunctionDef) -> Cfg<'_> {
    let stmts = f.statements();
    let mut nodes = vec![CfgNode::Entry, CfgNode::Exit];
    let mut index = BTreeMap::new();
    for s in &stmts {
        index.insert(s.line, nodes.len());
        nodes.push(CfgNode::Stmt(s));
    }
    let mut succs = vec![Vec::new(); nodes.len()];
    let first = link(&f.body, Cfg::EXIT, &index, &mut succs);
    succs[Cfg::ENTRY].push(first);
    Cfg { nodes, succs }
}

/// Wires `stmts` so that falling off the end reaches `follow`; returns the
/// node control enters the sequence at.
fn link(stmts: &[Stmt], follow: usize, index: &BTreeMap<Line, usize>, succs: &mut [Vec<usize>]) -> usize {
    let mut next = follow;
    for s in stmts.iter().rev() {
        let n = index[&s.line];
        succs[n] = match &s.kind {
            StmtKind::Return(_) => vec![Cfg::EXIT],
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                let t = link(then_block, next, index, succs);
                let e = link(else_block, next, index, succs);
                vec![t, e]
            }
            StmtKind::While { body, .. } => {
                let b = link(body, n, index, succs);
                vec![b, next]
            }
            _ => vec![next],
        };
        next = n;
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;
    use alloc::collections::BTreeSet;

    fn lines_cfg(src: &str) -> (Vec<Option<Line>>, Vec<Vec<usize>>) {
        let p = parse_program(src).unwrap();
        let cfg = build_cfg(&p.functions[0]);
        let labels = cfg
            .nodes
            .iter()
            .map(|n| match n {
                CfgNode::Stmt(s) => Some(s.line),
                _ => None,
            })
            .collect();
        (labels, cfg.succs)
    }

    fn reachable(succs: &[Vec<usize>], from: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(&succs[n]);
            }
        }
        seen
    }

    #[test]
    fn straight_line() {
        let (labels, succs) = lines_cfg("fn void main() {\n  skip;\n  skip;\n  skip;\n}");
        assert_eq!(labels, [None, None, Some(2), Some(3), Some(4)]);
        assert_eq!(succs, [vec![2], vec![], vec![3], vec![4], vec![1]]);
    }

    #[test]
    fn diamond() {
        let src = "fn void main(bool c) {\n  if (c) {\n    skip;\n  } else {\n    skip;\n  }\n  skip;\n}";
        let (_, succs) = lines_cfg(src);
        // entry, exit, if(2), then(3), else(5), join(7)
        assert_eq!(succs, [vec![2], vec![], vec![3, 4], vec![5], vec![5], vec![1]]);
        let mut paths = 0;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if n == 1 {
                paths += 1;
            }
            stack.extend(&succs[n]);
        }
        assert_eq!(paths, 2);
    }

    #[test]
    fn while_back_edge_matches_hand_built_adjacency() {
        let src = "fn void main(bool c) {\n  skip;\n  while (c) {\n    skip;\n    skip;\n  }\n  return;\n}";
        let (labels, succs) = lines_cfg(src);
        assert_eq!(labels, [None, None, Some(2), Some(3), Some(4), Some(5), Some(7)]);
        let expected: Vec<Vec<usize>> = vec![vec![2], vec![], vec![3], vec![4, 6], vec![5], vec![3], vec![1]];
        for n in 0..labels.len() {
            assert_eq!(reachable(&succs, n), reachable(&expected, n), "node {n}");
        }
        assert_eq!(succs, expected);
    }

    #[test]
    fn early_return_and_empty_else() {
        let src = "fn int main(bool c) {\n  if (c) {\n    return 1;\n  }\n  return 2;\n}";
        let (_, succs) = lines_cfg(src);
        assert_eq!(succs, [vec![2], vec![], vec![3, 4], vec![1], vec![1]]);
        let (_, succs) = lines_cfg("fn void main() {\n}");
        assert_eq!(succs, [vec![1], vec![]]);
    }
}
