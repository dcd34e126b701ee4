//! Solver-independent taint-flow queries over TQL-Lite programs.
//!
//! The crate is `no_std` (it needs `alloc`). Modules, bottom-up:
//!
//! - [`query`]: the query model and its fluent builders.
//! - [`text`]: the `.tq` query file format, import resolution and rendering.
//! - [`lang`]: TQL-Lite lexer, parser, IR, control-flow and call graphs.
//! - [`dynamic`]: a concrete interpreter that constructs traces exactly.
//! - [`dataflow`]: a static taint dataflow analysis approximating it.
//! - [`eval`]: taint analysis specifications, engines and findings.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataflow;
pub mod dynamic;
pub mod eval;
pub mod lang;
pub mod lex;
pub mod query;
pub mod text;
