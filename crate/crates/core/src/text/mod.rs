//! The `.tq` query file format.
//!
//! Each declaration is one fluent statement terminated by `;`:
//!
//! ```text
//! import "common/sources.tq";
//! Method source1 = method("String getParameter(String)").out().return_value();
//! MethodSet sources = method_set().add(source1).add(source2);
//! TaintFlowQuery xss = taint_flow_query().from(sources).not_through(sanitizer)
//!     .to(sinkXss).report("Reflective XSS vulnerability.").at(SOURCE);
//! ```
//!
//! `return()`, `thisObject()`, `notThrough()`, `new Method(..)`,
//! `new MethodSet()`, `new TaintFlowQuery()` and `Location.X` are accepted as
//! aliases; rendering always produces the canonical spelling above.

mod parse;
mod render;
mod resolve;

use alloc::string::String;
use alloc::vec::Vec;

use crate::lex::Pos;
use crate::query::{Location, MethodSpec};

pub use parse::{parse_query_file, parse_query_file_at};
pub use render::render;
pub use resolve::{parse_root, resolve_imports};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryFile {
    pub path: String,
    pub declarations: Vec<Declaration>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Declaration {
    Import {
        path: String,
        pos: Pos,
    },
    Method {
        name: String,
        pos: Pos,
        spec: MethodSpec,
    },
    MethodSet {
        name: String,
        pos: Pos,
        members: Vec<Participant>,
    },
    Query {
        name: String,
        pos: Pos,
        steps: Vec<QueryStep>,
    },
}

impl Declaration {
    pub fn name(&self) -> Option<&str> {
        match self {
            Declaration::Import { .. } => None,
            Declaration::Method { name, .. }
            | Declaration::MethodSet { name, .. }
            | Declaration::Query { name, .. } => Some(name),
        }
    }
}

/// A reference to a declared method or set, or an inline method expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Participant {
    Name { name: String, pos: Pos },
    Inline(MethodSpec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryStep {
    From(Participant),
    Through(Participant),
    NotThrough(Participant),
    To(Participant),
    And,
    Report(String),
    At(Location),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TextError {
    #[error("{path}:{pos}: syntax error: {message}")]
    Syntax {
        path: String,
        pos: Pos,
        message: String,
    },
    #[error("{path}:{pos}: unknown chain step `{step}`")]
    UnknownChainStep { path: String, pos: Pos, step: String },
    #[error("{path}:{pos}: unknown name `{name}`")]
    UnknownName { path: String, pos: Pos, name: String },
    #[error("{path}: duplicate name `{name}`")]
    DuplicateName { path: String, name: String },
    #[error("import cycle: {}", chain.join(" -> "))]
    ImportCycle { chain: Vec<String> },
    #[error("imported file not found: {path}")]
    FileNotFound { path: String },
}
