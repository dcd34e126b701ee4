//! In-memory query model: sensitive methods, method sets, taint flows and
//! taint-flow queries, with fluent builders mirroring the textual chain
//! syntax.
//!
//! ```
//! use tql_core::query::{method, taint_flow_query, Location};
//!
//! let source = method("String getParameter(String)").out().return_value().finish()?;
//! let sink = method("PrintWriter append(CharSequence)").r#in().param(0).finish()?;
//! let xss = taint_flow_query()
//!     .from(&source)
//!     .to(&sink)
//!     .report("Reflective XSS vulnerability.")
//!     .at(Location::Source)
//!     .finish()?;
//! assert_eq!(xss.flows().len(), 1);
//! # Ok::<(), tql_core::query::ModelError>(())
//! ```

mod flow;
mod method;
mod root;
mod signature;
mod validate;

use alloc::string::String;

pub use flow::{taint_flow_query, FlowParticipant, Location, MethodSet, QueryBuilder, TaintFlow, TaintFlowQuery};
pub use method::{method, Direction, MethodBuilder, MethodSpec, SensitiveValue, ValueLocation};
pub use root::QueryRoot;
pub use signature::{parse_signature, MethodSignature};
pub use validate::{validate, Diagnostic, Role, Rule};

pub(crate) use method::chain_suffix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("malformed signature `{raw}`: {reason}")]
    MalformedSignature { raw: String, reason: &'static str },
    #[error("illegal chain on `{signature}`: {reason}")]
    IllegalChain {
        signature: MethodSignature,
        reason: &'static str,
    },
    #[error("flow {flow} needs both from() and to()")]
    IncompleteFlow { flow: usize },
    #[error("query has no report() message")]
    MissingReport,
    #[error("report() given more than once")]
    DuplicateReport,
    #[error("misplaced {step}(): {reason}")]
    MisplacedStep {
        step: &'static str,
        reason: &'static str,
    },
    #[error("duplicate name `{name}`")]
    DuplicateName { name: String },
}
