//! TQL-Lite: a small imperative language with one statement per line.
//!
//! ```text
//! fn void doGet(String uName, HttpServletRequest request) {
//!   oldPass = call request.String getParameter(String)("oldKey");
//!   let clause = null;
//!   clause.password = oldPass;
//!   if (ok) {
//!     call writer.PrintWriter append(CharSequence)(uName);
//!   } else {
//!     skip;
//!   }
//! }
//! ```
//!
//! Calls spell out the full callee signature so queries can match them.
//! A call with a receiver is always external; a receiver-less call whose
//! name and parameter types match a function in the program is internal.

mod callgraph;
mod cfg;
mod parse;
mod print;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::lex::Pos;
use crate::query::MethodSignature;

pub use callgraph::{build_call_graph, match_sensitive, resolve_call, CallEdge, CallGraph, CallTarget};
pub use cfg::{build_cfg, Cfg, CfgNode};
pub use parse::parse_program;
pub use print::print_program;

/// Physical source line, 1-based.
pub type Line = u32;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Text(String),
    Null,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Text(s) => f.write_str(&crate::lex::quote(s)),
            Literal::Null => f.write_str("null"),
        }
    }
}

/// A variable or a literal, used for call arguments, conditions, indices
/// and return values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Var(String),
    Lit(Literal),
}

impl Operand {
    pub fn var(&self) -> Option<&str> {
        match self {
            Operand::Var(v) => Some(v),
            Operand::Lit(_) => None,
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => f.write_str(v),
            Operand::Lit(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Call {
    pub receiver: Option<String>,
    pub signature: MethodSignature,
    pub args: Vec<Operand>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    ConstAssign { target: String, value: Literal },
    Assign { target: String, source: String },
    LoadField { target: String, base: String, field: String },
    StoreField { base: String, field: String, source: String },
    LoadIndex { target: String, array: String, index: Operand },
    StoreIndex { array: String, index: Operand, source: String },
    Skip,
    Call { result: Option<String>, call: Call },
    If { cond: Operand, then_block: Vec<Stmt>, else_block: Vec<Stmt> },
    While { cond: Operand, body: Vec<Stmt> },
    Return(Option<Operand>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub line: Line,
    pub kind: StmtKind,
}

impl Stmt {
    /// Calls `f` on this statement and every statement nested in it, in
    /// source order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::If { then_block, else_block, .. } => {
                then_block.iter().chain(else_block).for_each(|s| s.walk(f));
            }
            StmtKind::While { body, .. } => body.iter().for_each(|s| s.walk(f)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionDef {
    pub signature: MethodSignature,
    pub params: Vec<String>,
    /// Line of the `fn` header.
    pub line: Line,
    pub body: Vec<Stmt>,
}

impl FunctionDef {
    pub fn name(&self) -> &str {
        self.signature.name()
    }

    /// Every statement of the body, nested ones included, in source order.
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        self.body.iter().for_each(|s| s.walk(&mut |s| out.push(s)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    /// Functions in source order.
    pub functions: Vec<FunctionDef>,
    pub entry: String,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name() == name)
    }

    pub fn entry_function(&self) -> &FunctionDef {
        self.function(&self.entry).expect("entry function exists")
    }

    /// Re-targets the program at another entry function.
    pub fn with_entry(mut self, name: &str) -> Result<Program, LangError> {
        if self.function(name).is_none() {
            return Err(LangError::UnknownEntry { name: name.into() });
        }
        self.entry = name.into();
        Ok(self)
    }
}

/// One segment of an access path beyond the base variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathExt {
    Field(String),
    Index(i64),
    /// Every element of an array at once.
    AnyIndex,
}

/// A variable, optionally extended by one field or array position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccessPath {
    pub base: String,
    pub ext: Option<PathExt>,
}

impl AccessPath {
    pub fn var(base: &str) -> Self {
        AccessPath {
            base: base.into(),
            ext: None,
        }
    }

    pub fn field(base: &str, field: &str) -> Self {
        AccessPath {
            base: base.into(),
            ext: Some(PathExt::Field(field.into())),
        }
    }

    pub fn index(base: &str, index: i64) -> Self {
        AccessPath {
            base: base.into(),
            ext: Some(PathExt::Index(index)),
        }
    }

    pub fn any_index(base: &str) -> Self {
        AccessPath {
            base: base.into(),
            ext: Some(PathExt::AnyIndex),
        }
    }
}

impl fmt::Display for AccessPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.ext {
            None => f.write_str(&self.base),
            Some(PathExt::Field(x)) => write!(f, "{}.{x}", self.base),
            Some(PathExt::Index(i)) => write!(f, "{}[{i}]", self.base),
            Some(PathExt::AnyIndex) => write!(f, "{}[*]", self.base),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LangError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: undeclared variable `{name}`")]
    UndeclaredVariable { pos: Pos, name: String },
    #[error("{pos}: duplicate function `{name}`")]
    DuplicateFunction { pos: Pos, name: String },
    #[error("program has no functions")]
    EmptyProgram,
    #[error("unknown entry function `{name}`")]
    UnknownEntry { name: String },
    #[error("line {line}: call to `{signature}` matches more than one function")]
    AmbiguousCall { line: Line, signature: MethodSignature },
}
