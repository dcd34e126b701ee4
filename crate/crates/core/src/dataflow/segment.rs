use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::eval::Tas;
use crate::query::{Direction, MethodSignature, MethodSpec, ValueLocation};

/// A simple TAS (no stages) plus how the surrounding stages behave inside
/// it: stage propagators carry taint, and boundary sinks either consume the
/// value (the real sinks) or let it flow on (a propagator of the next
/// stage). Real sinks still untaint their in-values in non-final segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub tas: Tas,
    pub propagators: Vec<MethodSpec>,
    pub killers: Vec<MethodSpec>,
    pub consuming: bool,
    /// Whether sources declared on the entry function's own signature apply.
    pub entry_sources: bool,
}

fn restricted(specs: &[MethodSpec], d: Direction) -> Vec<MethodSpec> {
    specs.iter().filter_map(|s| s.restricted(d)).collect()
}

/// Splits `tas` at its propagator stages: n stages give n + 1 segments,
/// `sources -> stage 1`, `stage 1 -> stage 2`, ..., `stage n -> sinks`.
pub fn decompose(tas: &Tas) -> Vec<Segment> {
    let n = tas.stages.len();
    let all: Vec<MethodSpec> = tas.stages.iter().flatten().cloned().collect();
    (0..=n)
        .map(|k| {
            let sources = if k == 0 {
                tas.sources.clone()
            } else {
                restricted(&tas.stages[k - 1], Direction::Out)
            };
            let last = k == n;
            let sinks = if last {
                tas.sinks.clone()
            } else {
                restricted(&tas.stages[k], Direction::In)
            };
            Segment {
                tas: Tas {
                    sources,
                    sanitizers: tas.sanitizers.clone(),
                    stages: Vec::new(),
                    sinks,
                },
                propagators: all.clone(),
                killers: if last { Vec::new() } else { tas.sinks.clone() },
                consuming: last,
                entry_sources: k == 0,
            }
        })
        .collect()
}

/// Per-call-site view of a segment.
#[derive(Debug, Clone, Default)]
pub(crate) struct SegmentRoles {
    pub source_out: BTreeSet<ValueLocation>,
    pub sink_in: BTreeSet<ValueLocation>,
    /// Sanitizer in-values plus the killed in-values of real sinks.
    pub untaint_in: BTreeSet<ValueLocation>,
    pub flows: Vec<(BTreeSet<ValueLocation>, BTreeSet<ValueLocation>)>,
}

impl Segment {
    pub(crate) fn roles(&self, sig: &MethodSignature) -> SegmentRoles {
        let base = self.tas.roles(sig);
        let mut roles = SegmentRoles {
            source_out: base.source_out,
            untaint_in: base.sanitizer_in,
            ..SegmentRoles::default()
        };
        if self.consuming {
            roles.untaint_in.extend(base.sink_in.iter().copied());
        }
        roles.sink_in = base.sink_in;
        for k in self.killers.iter().filter(|s| s.signature() == sig) {
            roles.untaint_in.extend(k.in_values());
        }
        for p in self.propagators.iter().filter(|s| s.signature() == sig) {
            roles.flows.push((p.in_values().collect(), p.out_values().collect()));
        }
        roles
    }
}
