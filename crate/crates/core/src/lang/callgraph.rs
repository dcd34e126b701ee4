use alloc::string::String;
use alloc::vec::Vec;

use super::{Call, FunctionDef, LangError, Line, Program, StmtKind};
use crate::query::{MethodSignature, MethodSpec};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CallTarget {
    Internal(String),
    External(MethodSignature),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CallEdge {
    pub caller: String,
    pub line: Line,
    pub target: CallTarget,
}

/// Call sites in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CallGraph {
    pub edges: Vec<CallEdge>,
}

impl CallGraph {
    pub fn callees_of<'g>(&'g self, caller: &'g str) -> impl Iterator<Item = &'g CallEdge> + 'g {
        self.edges.iter().filter(move |e| e.caller == caller)
    }
}

fn same_shape(a: &MethodSignature, b: &MethodSignature) -> bool {
    a.name() == b.name() && a.param_types() == b.param_types()
}

/// The function a call site dispatches to, or `None` when it is external.
/// Calls with a receiver are always external.
pub fn resolve_call<'p>(program: &'p Program, call: &Call) -> Option<&'p FunctionDef> {
    if call.receiver.is_some() {
        return None;
    }
    program
        .functions
        .iter()
        .find(|f| same_shape(&f.signature, &call.signature))
}

pub fn build_call_graph(program: &Program) -> Result<CallGraph, LangError> {
    let mut edges = Vec::new();
    for f in &program.functions {
        for s in f.statements() {
            let StmtKind::Call { call, .. } = &s.kind else {
                continue;
            };
            let target = if call.receiver.is_some() {
                CallTarget::External(call.signature.clone())
            } else {
                let mut matches = program
                    .functions
                    .iter()
                    .filter(|g| same_shape(&g.signature, &call.signature));
                match (matches.next(), matches.next()) {
                    (Some(g), None) => CallTarget::Internal(g.name().into()),
                    (None, _) => CallTarget::External(call.signature.clone()),
                    (Some(_), Some(_)) => {
                        return Err(LangError::AmbiguousCall {
                            line: s.line,
                            signature: call.signature.clone(),
                        })
                    }
                }
            };
            edges.push(CallEdge {
                caller: f.name().into(),
                line: s.line,
                target,
            });
        }
    }
    Ok(CallGraph { edges })
}

/// Whether `signature` (of a call site or function definition) is the
/// method `spec` describes.
pub fn match_sensitive(signature: &MethodSignature, spec: &MethodSpec) -> bool {
    signature == spec.signature()
}
