use std::fs;
use std::path::{Path, PathBuf};

use tql_core::lang::{parse_program, LangError, Program};
use tql_core::query::{validate, QueryRoot};
use tql_core::text::{parse_query_file_at, resolve_imports, TextError};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Program { path: PathBuf, source: LangError },
    #[error(transparent)]
    Queries(#[from] TextError),
    #[error("{}: invalid queries:\n{}", path.display(), diagnostics.join("\n"))]
    Invalid { path: PathBuf, diagnostics: Vec<String> },
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a program file and selects `entry` when given.
pub fn load_program(path: &Path, entry: Option<&str>) -> Result<Program, LoadError> {
    let located = |source| LoadError::Program {
        path: path.to_path_buf(),
        source,
    };
    let program = parse_program(&read(path)?).map_err(located)?;
    match entry {
        Some(name) => program.with_entry(name).map_err(located),
        None => Ok(program),
    }
}

/// Parses a query file with its imports (relative to the importing file)
/// and rejects roots that fail validation.
pub fn load_queries(path: &Path) -> Result<QueryRoot, LoadError> {
    let name = path.to_string_lossy().replace('\\', "/");
    let file = parse_query_file_at(&name, &read(path)?)?;
    let root = resolve_imports(file, |p| fs::read_to_string(p).ok())?;
    let diagnostics: Vec<String> = validate(&root).iter().map(ToString::to_string).collect();
    if !diagnostics.is_empty() {
        return Err(LoadError::Invalid {
            path: path.to_path_buf(),
            diagnostics,
        });
    }
    Ok(root)
}
