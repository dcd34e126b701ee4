//! Static taint analysis: flow-sensitive over each function's CFG,
//! context-insensitive across calls, with arrays smashed to one element.
//!
//! A TAS with propagator stages is split into one simple segment per
//! stage boundary ([`decompose`]); each segment is solved on its own and
//! the per-segment traces are joined at the shared propagator lines
//! ([`stitch`]).

mod segment;
mod solver;

use alloc::vec::Vec;

use crate::eval::{check_conflicts, collapse, Engine, EngineError, Tas, Trace, TraceSet};
use crate::lang::{AccessPath, Line, Program};

pub use segment::{decompose, Segment};
pub use solver::{analyze_segment, Analysis};

/// Index of a node in an [`Arena`].
pub type NodeId = usize;

/// A taint fact: the path is tainted by the trace ending at `node`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaintFact {
    pub path: AccessPath,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct FactNode {
    path: AccessPath,
    line: Line,
    pred: Option<NodeId>,
}

/// Interned fact history. Each node records the path it tainted, the line
/// that produced it and the node it was derived from.
#[derive(Debug, Clone, Default)]
pub struct Arena {
    nodes: Vec<FactNode>,
    index: alloc::collections::BTreeMap<FactNode, NodeId>,
}

impl Arena {
    fn intern(&mut self, node: FactNode) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        self.nodes.push(node.clone());
        self.index.insert(node, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    pub fn root(&mut self, path: AccessPath, line: Line) -> NodeId {
        self.intern(FactNode { path, line, pred: None })
    }

    /// Derives a node for `path` at `line` from `pred`. When the history of
    /// `pred` already holds the same path and line, that ancestor is reused,
    /// which keeps the node space finite on loops.
    pub fn extend(&mut self, path: AccessPath, line: Line, pred: NodeId) -> NodeId {
        let mut cur = Some(pred);
        while let Some(c) = cur {
            let n = &self.nodes[c];
            if n.line == line && n.path == path {
                return c;
            }
            cur = n.pred;
        }
        self.intern(FactNode {
            path,
            line,
            pred: Some(pred),
        })
    }

    /// A terminal node; never merged with an ancestor.
    pub fn complete(&mut self, path: AccessPath, line: Line, pred: NodeId) -> NodeId {
        self.intern(FactNode {
            path,
            line,
            pred: Some(pred),
        })
    }

    pub fn line(&self, node: NodeId) -> Line {
        self.nodes[node].line
    }

    /// Line of the source that started the history of `node`.
    pub fn origin(&self, mut node: NodeId) -> Line {
        while let Some(p) = self.nodes[node].pred {
            node = p;
        }
        self.nodes[node].line
    }

    pub fn predecessor(&self, node: NodeId) -> Option<NodeId> {
        self.nodes[node].pred
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Follows the predecessor chain of a completed node back to its source
/// and returns the lines in program order.
pub fn reconstruct(arena: &Arena, node: NodeId) -> Result<Trace, EngineError> {
    let mut lines = Vec::new();
    let mut cur = Some(node);
    while let Some(c) = cur {
        let n = arena.nodes.get(c).ok_or(EngineError::BrokenChain)?;
        if lines.len() > arena.nodes.len() {
            return Err(EngineError::BrokenChain);
        }
        lines.push(n.line);
        cur = n.pred;
    }
    lines.reverse();
    Ok(collapse(lines))
}

/// Traces of one segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentResult {
    pub index: usize,
    pub traces: TraceSet,
}

/// Joins consecutive segments: a trace of segment `i` ending at line `l`
/// continues with every trace of segment `i + 1` starting at `l`, and the
/// shared line appears once.
pub fn stitch(segments: &[SegmentResult]) -> TraceSet {
    let Some((first, rest)) = segments.split_first() else {
        return TraceSet::new();
    };
    let mut acc: TraceSet = first.traces.clone();
    for seg in rest {
        let mut next = TraceSet::new();
        for a in &acc {
            for b in &seg.traces {
                if a.last().is_some() && a.last() == b.first() {
                    let mut joined = a.clone();
                    joined.extend_from_slice(&b[1..]);
                    next.insert(joined);
                }
            }
        }
        acc = next;
    }
    acc
}

/// Static trace set of `tas` over `program`.
pub fn analyze(program: &Program, tas: &Tas) -> Result<TraceSet, EngineError> {
    tas.check()?;
    check_conflicts(program, tas)?;
    let results: Vec<SegmentResult> = decompose(tas)
        .iter()
        .enumerate()
        .map(|(index, seg)| SegmentResult {
            index,
            traces: analyze_segment(program, seg),
        })
        .collect();
    Ok(stitch(&results))
}

/// [`Engine`] adapter for the static analysis.
#[derive(Debug, Clone, Copy, Default)]
pub struct StaticEngine;

impl Engine for StaticEngine {
    fn id(&self) -> &'static str {
        "static"
    }

    fn run(&self, program: &Program, tas: &Tas) -> Result<TraceSet, EngineError> {
        analyze(program, tas)
    }
}
