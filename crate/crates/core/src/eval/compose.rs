use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{to_tas, Engine, EngineError, Trace, TraceSet};
use crate::lang::{Line, Program};
use crate::query::{Location, TaintFlowQuery};

pub const MAX_FINDINGS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Placement {
    pub line: Line,
    pub message: String,
}

/// One trace per flow of the query, plus where its message is shown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub traces: Vec<Trace>,
    pub message: String,
    pub placements: Vec<Placement>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("flow {flow}: {source}")]
    Engine { flow: usize, source: EngineError },
    #[error("query would produce {count} findings, more than the limit of {limit}")]
    TooManyFindings { count: u128, limit: usize },
}

/// Runs every flow of `query` and composes the results: one finding per
/// element of the cross product of the per-flow trace sets, in
/// lexicographic order of the trace tuples.
pub fn evaluate(query: &TaintFlowQuery, engine: &dyn Engine, program: &Program) -> Result<Vec<Finding>, EvalError> {
    let mut sets: Vec<Vec<Trace>> = Vec::new();
    for (flow, f) in query.flows().iter().enumerate() {
        let tas = to_tas(f);
        let traces: TraceSet = engine
            .run(program, &tas)
            .map_err(|source| EvalError::Engine { flow, source })?;
        sets.push(traces.into_iter().collect());
    }
    let count = sets.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
    if count > MAX_FINDINGS as u128 {
        return Err(EvalError::TooManyFindings {
            count,
            limit: MAX_FINDINGS,
        });
    }
    let mut findings = Vec::new();
    if count == 0 {
        return Ok(findings);
    }
    let mut odometer = alloc::vec![0usize; sets.len()];
    loop {
        let traces: Vec<Trace> = odometer.iter().zip(&sets).map(|(&i, s)| s[i].clone()).collect();
        let placements = place_messages(&traces, query.message(), query.location());
        findings.push(Finding {
            traces,
            message: query.message().into(),
            placements,
        });
        let mut k = sets.len();
        loop {
            if k == 0 {
                return Ok(findings);
            }
            k -= 1;
            odometer[k] += 1;
            if odometer[k] < sets[k].len() {
                break;
            }
            odometer[k] = 0;
        }
    }
}

/// Message placements for a finding's traces: the head of each trace, its
/// last line, or both; collapsed and ordered by line.
pub fn place_messages(traces: &[Trace], message: &str, location: Location) -> Vec<Placement> {
    let mut lines = BTreeSet::new();
    for t in traces {
        if matches!(location, Location::Source | Location::SourceAndSink) {
            lines.extend(t.first());
        }
        if matches!(location, Location::Sink | Location::SourceAndSink) {
            lines.extend(t.last());
        }
    }
    lines
        .into_iter()
        .map(|line| Placement {
            line,
            message: message.into(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Tas;
    use crate::lang::parse_program;
    use crate::query::{method, taint_flow_query, MethodSpec, TaintFlowQuery};
    use alloc::vec;
    use proptest::prelude::*;

    /// Answers each flow from a fixed table keyed by the source signature.
    struct Scripted(Vec<(String, TraceSet)>);

    impl Engine for Scripted {
        fn id(&self) -> &'static str {
            "scripted"
        }
        fn run(&self, _: &Program, tas: &Tas) -> Result<TraceSet, EngineError> {
            let name = tas.sources[0].signature().name();
            Ok(self.0.iter().find(|(n, _)| n == name).map(|(_, t)| t.clone()).unwrap_or_default())
        }
    }

    fn source(name: &str) -> MethodSpec {
        method(&alloc::format!("String {name}()")).out().return_value().finish().unwrap()
    }

    fn query(flows: usize, location: Location) -> TaintFlowQuery {
        let sink = method("void sink(String)").r#in().param(0).finish().unwrap();
        let mut b = taint_flow_query();
        for k in 0..flows {
            if k > 0 {
                b = b.and();
            }
            b = b.from(source(&alloc::format!("s{k}"))).to(&sink);
        }
        b.report("m").at(location).finish().unwrap()
    }

    fn program() -> Program {
        parse_program("fn void main() {\n}").unwrap()
    }

    fn traces(n: usize, salt: u32) -> TraceSet {
        (0..n as u32).map(|i| vec![salt * 100 + i, 999]).collect()
    }

    proptest! {
        #[test]
        fn finding_count_is_the_product(counts in proptest::collection::vec(0usize..5, 1..4)) {
            let table = counts.iter().enumerate()
                .map(|(k, &c)| (alloc::format!("s{k}"), traces(c, k as u32 + 1)))
                .collect();
            let q = query(counts.len(), Location::SourceAndSink);
            let findings = evaluate(&q, &Scripted(table), &program()).unwrap();
            prop_assert_eq!(findings.len(), counts.iter().product::<usize>());
            for f in &findings {
                prop_assert_eq!(f.traces.len(), counts.len());
                for p in &f.placements {
                    prop_assert!(f.traces.iter().any(|t| t.contains(&p.line)));
                }
            }
            let keys: Vec<&Vec<Trace>> = findings.iter().map(|f| &f.traces).collect();
            prop_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn placements() {
        let three = vec![vec![2, 4, 26], vec![1, 4, 26], vec![3, 4, 26]];
        let lines = |loc| place_messages(&three, "m", loc).into_iter().map(|p| p.line).collect::<Vec<_>>();
        assert_eq!(lines(Location::SourceAndSink), [1, 2, 3, 26]);
        assert_eq!(lines(Location::Sink), [26]);
        assert_eq!(place_messages(&[vec![5, 9]], "m", Location::Source).len(), 1);
    }

    #[test]
    fn empty_flow_means_no_findings() {
        let table = vec![("s0".into(), traces(2, 1)), ("s1".into(), TraceSet::new())];
        let q = query(2, Location::Sink);
        assert!(evaluate(&q, &Scripted(table), &program()).unwrap().is_empty());
    }

    #[test]
    fn cross_product_cap() {
        let table = (0..3).map(|k| (alloc::format!("s{k}"), traces(30, k + 1))).collect();
        let q = query(3, Location::Sink);
        let err = evaluate(&q, &Scripted(table), &program()).unwrap_err();
        assert_eq!(err, EvalError::TooManyFindings { count: 27_000, limit: MAX_FINDINGS });
    }
}
