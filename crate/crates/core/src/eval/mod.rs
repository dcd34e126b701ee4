//! Evaluation: flows become taint analysis specifications, an [`Engine`]
//! turns each into a trace set, and and()-joined flows are composed into
//! findings by cross product.

mod compose;
mod tas;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::lang::{Line, Program};
use crate::query::MethodSignature;

pub use compose::{evaluate, place_messages, EvalError, Finding, Placement, MAX_FINDINGS};
pub use tas::{to_tas, SiteRoles, Tas, TasError, MAX_STAGES};

/// Statement lines from a source call to a sink call.
pub type Trace = Vec<Line>;
/// Traces in lexicographic order.
pub type TraceSet = BTreeSet<Trace>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    InvalidTas(#[from] TasError),
    #[error("line {line}: `{signature}` is both a source and a sanitizer")]
    ConflictingRoles { line: Line, signature: MethodSignature },
    #[error("step budget of {budget} exceeded")]
    StepBudgetExceeded { budget: u64 },
    #[error("call depth limit of {limit} exceeded")]
    CallDepthExceeded { limit: usize },
    #[error("line {line}: runtime fault: {message}")]
    RuntimeFault { line: Line, message: String },
    #[error("broken predecessor chain")]
    BrokenChain,
}

/// A taint engine: anything that computes the trace set of one TAS over a
/// program.
pub trait Engine {
    fn id(&self) -> &'static str;
    fn run(&self, program: &Program, tas: &Tas) -> Result<TraceSet, EngineError>;
}

/// Lines of a raw node chain with consecutive repeats collapsed (a body
/// statement may share its function's header line).
pub(crate) fn collapse(lines: impl IntoIterator<Item = Line>) -> Trace {
    let mut out: Trace = Vec::new();
    for l in lines {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    out
}

/// Rejects a TAS under which some external call site of `program` would be
/// both a source and a sanitizer.
pub(crate) fn check_conflicts(program: &Program, tas: &Tas) -> Result<(), EngineError> {
    for f in &program.functions {
        for s in f.statements() {
            let crate::lang::StmtKind::Call { call, .. } = &s.kind else {
                continue;
            };
            if crate::lang::resolve_call(program, call).is_some() {
                continue;
            }
            let roles = tas.roles(&call.signature);
            if roles.is_source() && roles.is_sanitizer() {
                return Err(EngineError::ConflictingRoles {
                    line: s.line,
                    signature: call.signature.clone(),
                });
            }
        }
    }
    Ok(())
}
