use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::parse::parse_query_file_at;
use super::{Declaration, Participant, QueryFile, QueryStep, TextError};
use crate::query::{taint_flow_query, FlowParticipant, MethodSet, ModelError, QueryRoot};

/// Parses a self-contained query file (imports are rejected as not found).
pub fn parse_root(source: &str) -> Result<QueryRoot, TextError> {
    let file = super::parse_query_file(source)?;
    resolve_imports(file, |_| None)
}

/// Loads every file reachable through imports and merges all declarations
/// into one root. `loader` receives import paths already joined onto the
/// importing file's directory and returns `None` when the file is missing.
/// Each file is loaded once; names are resolved against the file's own
/// declarations plus everything it imports, transitively.
pub fn resolve_imports(
    entry: QueryFile,
    mut loader: impl FnMut(&str) -> Option<String>,
) -> Result<QueryRoot, TextError> {
    let mut ordered = Vec::new();
    let mut visited = BTreeSet::new();
    let mut stack = Vec::new();
    let entry_path = normalize(&entry.path);
    collect(entry, entry_path, &mut loader, &mut stack, &mut visited, &mut ordered)?;

    let mut root = QueryRoot::new();
    // the entry file is collected last
    let imported = ordered.len().saturating_sub(1);
    root.imports = ordered[..imported].iter().map(|(p, _)| p.clone()).collect();
    for (_, file) in &ordered {
        merge(&mut root, file)?;
    }
    Ok(root)
}

fn collect(
    file: QueryFile,
    path: String,
    loader: &mut impl FnMut(&str) -> Option<String>,
    stack: &mut Vec<String>,
    visited: &mut BTreeSet<String>,
    ordered: &mut Vec<(String, QueryFile)>,
) -> Result<(), TextError> {
    stack.push(path.clone());
    for decl in &file.declarations {
        if let Declaration::Import { path: rel, .. } = decl {
            let target = join(&path, rel);
            if stack.contains(&target) {
                let mut chain = stack.clone();
                chain.push(target);
                return Err(TextError::ImportCycle { chain });
            }
            if visited.contains(&target) {
                continue;
            }
            let source = loader(&target).ok_or_else(|| TextError::FileNotFound {
                path: target.clone(),
            })?;
            let imported = parse_query_file_at(&target, &source)?;
            collect(imported, target, loader, stack, visited, ordered)?;
        }
    }
    stack.pop();
    visited.insert(path.clone());
    ordered.push((path, file));
    Ok(())
}

fn merge(root: &mut QueryRoot, file: &QueryFile) -> Result<(), TextError> {
    let dup = |e: ModelError| match e {
        ModelError::DuplicateName { name } => TextError::DuplicateName {
            path: file.path.clone(),
            name,
        },
        other => TextError::Syntax {
            path: file.path.clone(),
            pos: Default::default(),
            message: other.to_string(),
        },
    };

    for decl in &file.declarations {
        if let Declaration::Method { name, spec, .. } = decl {
            root.add_method(name, spec.clone()).map_err(dup)?;
        }
    }
    for decl in &file.declarations {
        if let Declaration::MethodSet { name, members, .. } = decl {
            let mut set = MethodSet::new(name.as_str());
            for member in members {
                match resolve(root, &file.path, member)? {
                    FlowParticipant::Method(spec) => set.push(spec),
                    FlowParticipant::Set(inner) => {
                        for spec in inner.members() {
                            set.push(spec.clone());
                        }
                    }
                }
            }
            root.add_set(set).map_err(dup)?;
        }
    }
    for decl in &file.declarations {
        if let Declaration::Query { name, pos, steps } = decl {
            let mut builder = taint_flow_query();
            for step in steps {
                builder = match step {
                    QueryStep::From(p) => builder.from(resolve(root, &file.path, p)?),
                    QueryStep::Through(p) => builder.through(resolve(root, &file.path, p)?),
                    QueryStep::NotThrough(p) => builder.not_through(resolve(root, &file.path, p)?),
                    QueryStep::To(p) => builder.to(resolve(root, &file.path, p)?),
                    QueryStep::And => builder.and(),
                    QueryStep::Report(m) => builder.report(m.as_str()),
                    QueryStep::At(loc) => builder.at(*loc),
                };
            }
            let query = builder.finish().map_err(|e| TextError::Syntax {
                path: file.path.clone(),
                pos: *pos,
                message: e.to_string(),
            })?;
            root.add_query(name, query).map_err(dup)?;
        }
    }
    Ok(())
}

fn resolve(root: &QueryRoot, path: &str, participant: &Participant) -> Result<FlowParticipant, TextError> {
    match participant {
        Participant::Inline(spec) => Ok(FlowParticipant::Method(spec.clone())),
        Participant::Name { name, pos } => {
            if let Some(spec) = root.method_specs.get(name) {
                Ok(FlowParticipant::Method(spec.clone()))
            } else if let Some(set) = root.method_sets.get(name) {
                Ok(FlowParticipant::Set(set.clone()))
            } else {
                Err(TextError::UnknownName {
                    path: path.to_string(),
                    pos: *pos,
                    name: name.clone(),
                })
            }
        }
    }
}

/// Joins `rel` onto the directory of `base` and removes `.`/`..` segments.
pub(crate) fn join(base: &str, rel: &str) -> String {
    if rel.starts_with('/') {
        return normalize(rel);
    }
    match base.rfind('/') {
        Some(i) => normalize(&[&base[..=i], rel].concat()),
        None => normalize(rel),
    }
}

pub(crate) fn normalize(path: &str) -> String {
    let absolute = path.starts_with('/');
    let mut parts: Vec<&str> = Vec::new();
    for seg in path.split('/') {
        match seg {
            "" | "." => {}
            ".." if parts.last().is_some_and(|p| *p != "..") => {
                parts.pop();
            }
            ".." if absolute => {}
            s => parts.push(s),
        }
    }
    let joined = parts.join("/");
    if absolute {
        ["/", &joined].concat()
    } else {
        joined
    }
}
