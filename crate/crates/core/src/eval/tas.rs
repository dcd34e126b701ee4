use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::query::{Direction, MethodSignature, MethodSpec, TaintFlow, ValueLocation};

/// Stage masks are stored as bits of a `u64`.
pub const MAX_STAGES: usize = 64;

/// A taint analysis specification: sources, sanitizers, ordered
/// required-propagator stages and sinks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tas {
    pub sources: Vec<MethodSpec>,
    pub sanitizers: Vec<MethodSpec>,
    pub stages: Vec<Vec<MethodSpec>>,
    pub sinks: Vec<MethodSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TasError {
    #[error("no sources")]
    NoSources,
    #[error("no sinks")]
    NoSinks,
    #[error("propagator stage {stage} is empty")]
    EmptyStage { stage: usize },
    #[error("`{signature}` lacks an {needs} value for its role")]
    MissingValue {
        signature: MethodSignature,
        needs: Direction,
    },
    #[error("at most {MAX_STAGES} propagator stages are supported")]
    TooManyStages,
}

fn flatten<'a>(participants: impl IntoIterator<Item = &'a crate::query::FlowParticipant>) -> Vec<MethodSpec> {
    let mut out: Vec<MethodSpec> = Vec::new();
    for p in participants {
        for spec in p.resolve() {
            if !out.contains(spec) {
                out.push(spec.clone());
            }
        }
    }
    out
}

/// Maps a flow onto a TAS, flattening method sets and keeping stage order.
pub fn to_tas(flow: &TaintFlow) -> Tas {
    Tas {
        sources: flatten([&flow.from]),
        sanitizers: flatten(&flow.not_through),
        stages: flow.through.iter().map(|p| flatten([p])).collect(),
        sinks: flatten([&flow.to]),
    }
}

/// Values a single call site is subject to under one TAS, merged over every
/// spec whose signature matches.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiteRoles {
    pub source_out: BTreeSet<ValueLocation>,
    pub sanitizer_in: BTreeSet<ValueLocation>,
    pub sink_in: BTreeSet<ValueLocation>,
    /// `(stage, in-values, out-values)` per matching stage.
    pub stages: Vec<(usize, BTreeSet<ValueLocation>, BTreeSet<ValueLocation>)>,
}

impl SiteRoles {
    pub fn is_source(&self) -> bool {
        !self.source_out.is_empty()
    }

    pub fn is_sanitizer(&self) -> bool {
        !self.sanitizer_in.is_empty()
    }

    pub fn is_sink(&self) -> bool {
        !self.sink_in.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        !self.is_source() && !self.is_sanitizer() && !self.is_sink() && self.stages.is_empty()
    }
}

impl Tas {
    /// Checks the role constraints: sources need OUT values, sanitizers and
    /// sinks IN values, propagators both; sources and sinks are non-empty.
    pub fn check(&self) -> Result<(), TasError> {
        if self.sources.is_empty() {
            return Err(TasError::NoSources);
        }
        if self.sinks.is_empty() {
            return Err(TasError::NoSinks);
        }
        if self.stages.len() > MAX_STAGES {
            return Err(TasError::TooManyStages);
        }
        let need = |spec: &MethodSpec, d: Direction| {
            if spec.has(d) {
                Ok(())
            } else {
                Err(TasError::MissingValue {
                    signature: spec.signature().clone(),
                    needs: d,
                })
            }
        };
        self.sources.iter().try_for_each(|s| need(s, Direction::Out))?;
        self.sanitizers.iter().try_for_each(|s| need(s, Direction::In))?;
        self.sinks.iter().try_for_each(|s| need(s, Direction::In))?;
        for (stage, specs) in self.stages.iter().enumerate() {
            if specs.is_empty() {
                return Err(TasError::EmptyStage { stage });
            }
            for s in specs {
                need(s, Direction::In)?;
                need(s, Direction::Out)?;
            }
        }
        Ok(())
    }

    pub fn roles(&self, signature: &MethodSignature) -> SiteRoles {
        let matching = |specs: &'_ [MethodSpec]| -> Vec<MethodSpec> {
            specs.iter().filter(|s| s.signature() == signature).cloned().collect()
        };
        let ins = |specs: &[MethodSpec]| specs.iter().flat_map(|s| s.in_values().collect::<Vec<_>>()).collect();
        let outs = |specs: &[MethodSpec]| specs.iter().flat_map(|s| s.out_values().collect::<Vec<_>>()).collect();
        let mut roles = SiteRoles {
            source_out: outs(&matching(&self.sources)),
            sanitizer_in: ins(&matching(&self.sanitizers)),
            sink_in: ins(&matching(&self.sinks)),
            stages: Vec::new(),
        };
        for (i, specs) in self.stages.iter().enumerate() {
            let m = matching(specs);
            if !m.is_empty() {
                roles.stages.push((i, ins(&m), outs(&m)));
            }
        }
        roles
    }
}
