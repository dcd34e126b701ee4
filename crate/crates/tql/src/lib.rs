//! Command-line front end for `tql-core`: file loading, finding reports in
//! text or JSON, and a corpus harness that checks programs against frozen
//! expected-findings manifests.

pub mod cli;
pub mod corpus;
pub mod load;
pub mod report;

pub use cli::run_cli;
pub use corpus::{run_corpus, CorpusReport, Expect, Manifest};
pub use load::{load_program, load_queries, LoadError};
pub use report::{render, run_queries, EngineKind, Format, Report};
