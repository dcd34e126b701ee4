use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tql_core::dataflow::StaticEngine;
use tql_core::dynamic::DynamicEngine;
use tql_core::eval::{evaluate, Engine, EvalError, Trace};
use tql_core::lang::Program;
use tql_core::query::QueryRoot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    #[default]
    Static,
    Dynamic,
}

impl EngineKind {
    pub const ALL: [EngineKind; 2] = [EngineKind::Static, EngineKind::Dynamic];

    pub fn id(self) -> &'static str {
        match self {
            EngineKind::Static => "static",
            EngineKind::Dynamic => "dynamic",
        }
    }

    pub fn engine(self, budget: u64) -> Box<dyn Engine> {
        match self {
            EngineKind::Static => Box::new(StaticEngine),
            EngineKind::Dynamic => Box::new(DynamicEngine {
                budget,
                ..DynamicEngine::default()
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub engine: String,
    pub program: String,
    pub findings: Vec<FindingReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingReport {
    pub query: String,
    pub message: String,
    pub location: String,
    pub traces: Vec<Trace>,
    pub placements: Vec<PlacementReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementReport {
    pub file: String,
    pub line: u32,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
#[error("query `{query}`: {source}")]
pub struct QueryError {
    pub query: String,
    pub source: Box<EvalError>,
}

/// Evaluates every query of `root` (in name order) on `program`.
pub fn run_queries(
    root: &QueryRoot,
    program: &Program,
    program_name: &str,
    engine: &dyn Engine,
) -> Result<Report, QueryError> {
    let mut findings = Vec::new();
    for (name, query) in &root.queries {
        let found = evaluate(query, engine, program).map_err(|source| QueryError {
            query: name.clone(),
            source: Box::new(source),
        })?;
        for f in found {
            findings.push(FindingReport {
                query: name.clone(),
                message: f.message,
                location: query.location().to_string(),
                traces: f.traces,
                placements: f
                    .placements
                    .into_iter()
                    .map(|p| PlacementReport {
                        file: program_name.to_string(),
                        line: p.line,
                        message: p.message,
                    })
                    .collect(),
            });
        }
    }
    Ok(Report {
        engine: engine.id().to_string(),
        program: program_name.to_string(),
        findings,
    })
}

fn join_lines(t: &[u32]) -> String {
    t.iter().map(u32::to_string).collect::<Vec<_>>().join(" -> ")
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        Format::Text => render_text(report),
    }
}

fn render_text(report: &Report) -> String {
    let mut out = String::new();
    if report.findings.is_empty() {
        let _ = writeln!(out, "{} ({}): no findings", report.program, report.engine);
        return out;
    }
    let n = report.findings.len();
    let _ = writeln!(
        out,
        "{} ({}): {n} finding{}",
        report.program,
        report.engine,
        if n == 1 { "" } else { "s" }
    );
    for (k, f) in report.findings.iter().enumerate() {
        let _ = writeln!(out, "\n[{}] {}: {}", k + 1, f.query, f.message);
        for p in &f.placements {
            let _ = writeln!(out, "  at {}:{}", p.file, p.line);
        }
        for (j, t) in f.traces.iter().enumerate() {
            let _ = writeln!(out, "  trace {}: {}", j + 1, join_lines(t));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            engine: "static".into(),
            program: "p.tl".into(),
            findings: vec![FindingReport {
                query: "q".into(),
                message: "m".into(),
                location: "SINK".into(),
                traces: vec![vec![1, 2], vec![3, 2]],
                placements: vec![PlacementReport {
                    file: "p.tl".into(),
                    line: 2,
                    message: "m".into(),
                }],
            }],
        }
    }

    #[test]
    fn text_lists_placements_and_traces() {
        let text = render(&sample(), Format::Text);
        assert!(text.starts_with("p.tl (static): 1 finding\n"));
        assert!(text.contains("  at p.tl:2\n"));
        assert!(text.contains("  trace 2: 3 -> 2\n"));
    }

    #[test]
    fn empty_report() {
        let r = Report {
            findings: vec![],
            ..sample()
        };
        assert_eq!(render(&r, Format::Text), "p.tl (static): no findings\n");
        let json: serde_json::Value = serde_json::from_str(&render(&r, Format::Json)).unwrap();
        assert_eq!(json["findings"], serde_json::json!([]));
    }

    #[test]
    fn json_round_trips() {
        let r = sample();
        let back: Report = serde_json::from_str(&render(&r, Format::Json)).unwrap();
        assert_eq!(back, r);
    }
}
