use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tql_core::dynamic::DEFAULT_BUDGET;
use tql_core::eval::Trace;

use crate::load::{load_program, load_queries};
use crate::report::{run_queries, EngineKind, Report};

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

/// Expected outcome of one program/query pair. Paths are relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub program: String,
    pub queries: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    /// Engines the expectation holds for; both when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engines: Option<Vec<EngineKind>>,
    pub expect: BTreeMap<String, Expect>,
}

/// Finding count plus the distinct traces over all findings, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expect {
    pub count: usize,
    pub traces: Vec<Trace>,
}

impl Expect {
    pub fn of(report: &Report, query: &str) -> Expect {
        let mine: Vec<_> = report.findings.iter().filter(|f| f.query == query).collect();
        let traces: BTreeSet<Trace> = mine.iter().flat_map(|f| f.traces.iter().cloned()).collect();
        Expect {
            count: mine.len(),
            traces: traces.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseResult {
    pub manifest: String,
    pub engine: EngineKind,
    pub query: String,
    pub expected: Expect,
    pub actual: Expect,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusReport {
    pub cases: Vec<CaseResult>,
    /// Manifests that could not be run, with the reason.
    pub errors: Vec<(String, String)>,
    pub reports: Vec<Report>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.cases.iter().all(CaseResult::passed)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{verdict} {} [{}] {}", c.manifest, c.engine.id(), c.query);
            if !c.passed() {
                let _ = writeln!(
                    out,
                    "  expected {} finding(s) {:?}, got {} {:?}",
                    c.expected.count, c.expected.traces, c.actual.count, c.actual.traces
                );
            }
        }
        for (m, e) in &self.errors {
            let _ = writeln!(out, "ERROR {m}: {e}");
        }
        let failed = self.cases.iter().filter(|c| !c.passed()).count();
        let _ = writeln!(
            out,
            "{} case(s), {} failed, {} error(s)",
            self.cases.len(),
            failed,
            self.errors.len()
        );
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("corpus report serializes") + "\n"
    }
}

/// Every manifest below `dir`, in path order.
pub fn find_manifests(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut pending = vec![dir.to_path_buf()];
    while let Some(d) = pending.pop() {
        for entry in fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                pending.push(path);
            } else if path.to_string_lossy().ends_with(MANIFEST_SUFFIX) {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}

fn display(path: &Path, dir: &Path) -> String {
    path.strip_prefix(dir).unwrap_or(path).to_string_lossy().replace('\\', "/")
}

fn run_manifest(
    path: &Path,
    dir: &Path,
    only: Option<EngineKind>,
    out: &mut CorpusReport,
) -> Result<(), String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let base = path.parent().unwrap_or(Path::new("."));
    let program_path = base.join(&manifest.program);
    let program = load_program(&program_path, manifest.entry.as_deref()).map_err(|e| e.to_string())?;
    let root = load_queries(&base.join(&manifest.queries)).map_err(|e| e.to_string())?;
    if let Some(q) = manifest.expect.keys().find(|q| !root.queries.contains_key(*q)) {
        return Err(format!("manifest expects unknown query `{q}`"));
    }
    let engines = manifest.engines.clone().unwrap_or_else(|| EngineKind::ALL.to_vec());
    let name = display(path, dir);
    for kind in engines.into_iter().filter(|k| only.is_none_or(|o| o == *k)) {
        let engine = kind.engine(DEFAULT_BUDGET);
        let report =
            run_queries(&root, &program, &display(&program_path, dir), engine.as_ref()).map_err(|e| e.to_string())?;
        for (query, expected) in &manifest.expect {
            out.cases.push(CaseResult {
                manifest: name.clone(),
                engine: kind,
                query: query.clone(),
                expected: expected.clone(),
                actual: Expect::of(&report, query),
            });
        }
        out.reports.push(report);
    }
    Ok(())
}

/// Runs every manifest below `dir`, restricted to `only` when given.
pub fn run_corpus(dir: &Path, only: Option<EngineKind>) -> std::io::Result<CorpusReport> {
    let mut report = CorpusReport {
        cases: Vec::new(),
        errors: Vec::new(),
        reports: Vec::new(),
    };
    for path in find_manifests(dir)? {
        if let Err(e) = run_manifest(&path, dir, only, &mut report) {
            report.errors.push((display(&path, dir), e));
        }
    }
    Ok(report)
}
