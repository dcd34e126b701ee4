use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::method::MethodSpec;
use super::ModelError;

/// Where a finding's message is attached in the analyzed code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Location {
    Source,
    Sink,
    #[default]
    SourceAndSink,
}

impl Location {
    pub fn as_str(self) -> &'static str {
        match self {
            Location::Source => "SOURCE",
            Location::Sink => "SINK",
            Location::SourceAndSink => "SOURCEANDSINK",
        }
    }

    pub fn parse(s: &str) -> Option<Location> {
        match s {
            "SOURCE" => Some(Location::Source),
            "SINK" => Some(Location::Sink),
            "SOURCEANDSINK" => Some(Location::SourceAndSink),
            _ => None,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named, ordered group of method specs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodSet {
    name: String,
    members: Vec<MethodSpec>,
}

impl MethodSet {
    pub fn new(name: impl Into<String>) -> Self {
        MethodSet {
            name: name.into(),
            members: Vec::new(),
        }
    }

    /// Appends a member unless a structurally equal spec is already present.
    #[must_use]
    #[allow(clippy::should_implement_trait)]
    pub fn add(mut self, spec: MethodSpec) -> Self {
        self.push(spec);
        self
    }

    pub fn push(&mut self, spec: MethodSpec) {
        if !self.members.contains(&spec) {
            self.members.push(spec);
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[MethodSpec] {
        &self.members
    }
}

/// Either a single method or a method set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FlowParticipant {
    Method(MethodSpec),
    Set(MethodSet),
}

impl FlowParticipant {
    /// The specs this participant stands for, in order and without duplicates.
    pub fn resolve(&self) -> &[MethodSpec] {
        match self {
            FlowParticipant::Method(spec) => core::slice::from_ref(spec),
            FlowParticipant::Set(set) => set.members(),
        }
    }

    /// Label used in diagnostics: the set name or the method signature.
    pub fn label(&self) -> String {
        use alloc::string::ToString;
        match self {
            FlowParticipant::Method(spec) => spec.signature().to_string(),
            FlowParticipant::Set(set) => set.name().to_string(),
        }
    }
}

impl From<MethodSpec> for FlowParticipant {
    fn from(spec: MethodSpec) -> Self {
        FlowParticipant::Method(spec)
    }
}

impl From<&MethodSpec> for FlowParticipant {
    fn from(spec: &MethodSpec) -> Self {
        FlowParticipant::Method(spec.clone())
    }
}

impl From<MethodSet> for FlowParticipant {
    fn from(set: MethodSet) -> Self {
        FlowParticipant::Set(set)
    }
}

impl From<&MethodSet> for FlowParticipant {
    fn from(set: &MethodSet) -> Self {
        FlowParticipant::Set(set.clone())
    }
}

/// One source-to-sink flow. Each `through` entry is a propagator stage that
/// a trace has to pass, in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaintFlow {
    pub from: FlowParticipant,
    pub through: Vec<FlowParticipant>,
    pub not_through: Vec<FlowParticipant>,
    pub to: FlowParticipant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaintFlowQuery {
    flows: Vec<TaintFlow>,
    message: String,
    location: Location,
}

impl TaintFlowQuery {
    pub fn new(flows: Vec<TaintFlow>, message: impl Into<String>, location: Location) -> Result<Self, ModelError> {
        let message = message.into();
        if flows.is_empty() {
            return Err(ModelError::IncompleteFlow { flow: 0 });
        }
        if message.is_empty() {
            return Err(ModelError::MissingReport);
        }
        Ok(TaintFlowQuery {
            flows,
            message,
            location,
        })
    }

    pub fn flows(&self) -> &[TaintFlow] {
        &self.flows
    }

    pub fn message(&self) -> &str {
        &self.message
    }

    pub fn location(&self) -> Location {
        self.location
    }
}

pub fn taint_flow_query() -> QueryBuilder {
    QueryBuilder {
        state: Ok(QueryState::default()),
    }
}

/// Fluent builder for [`TaintFlowQuery`]:
/// `from(..).through(..).not_through(..).to(..).and().from(..)...report(..).at(..)`.
#[derive(Debug, Clone)]
#[must_use]
pub struct QueryBuilder {
    state: Result<QueryState, ModelError>,
}

#[derive(Debug, Clone, Default)]
struct QueryState {
    done: Vec<TaintFlow>,
    segment: Segment,
    message: Option<String>,
    location: Option<Location>,
}

#[derive(Debug, Clone, Default)]
struct Segment {
    from: Option<FlowParticipant>,
    through: Vec<FlowParticipant>,
    not_through: Vec<FlowParticipant>,
    to: Option<FlowParticipant>,
}

impl Segment {
    fn is_empty(&self) -> bool {
        self.from.is_none() && self.to.is_none() && self.through.is_empty() && self.not_through.is_empty()
    }
}

impl QueryBuilder {
    pub fn from(self, participant: impl Into<FlowParticipant>) -> Self {
        let participant = participant.into();
        self.flow_step("from", |seg| {
            if seg.from.is_some() {
                return Err("from() given twice in one flow");
            }
            if seg.to.is_some() {
                return Err("from() after to(); use and() to start a new flow");
            }
            seg.from = Some(participant);
            Ok(())
        })
    }

    pub fn through(self, participant: impl Into<FlowParticipant>) -> Self {
        let participant = participant.into();
        self.flow_step("through", |seg| {
            if seg.to.is_some() {
                return Err("through() after to()");
            }
            seg.through.push(participant);
            Ok(())
        })
    }

    pub fn not_through(self, participant: impl Into<FlowParticipant>) -> Self {
        let participant = participant.into();
        self.flow_step("not_through", |seg| {
            if seg.to.is_some() {
                return Err("not_through() after to()");
            }
            seg.not_through.push(participant);
            Ok(())
        })
    }

    pub fn to(self, participant: impl Into<FlowParticipant>) -> Self {
        let participant = participant.into();
        self.flow_step("to", |seg| {
            if seg.to.is_some() {
                return Err("to() given twice in one flow");
            }
            seg.to = Some(participant);
            Ok(())
        })
    }

    pub fn and(self) -> Self {
        self.update(|state| {
            if state.message.is_some() {
                return Err(ModelError::MisplacedStep {
                    step: "and",
                    reason: "and() after report()",
                });
            }
            let flow = close(&mut state.segment, state.done.len())?;
            state.done.push(flow);
            Ok(())
        })
    }

    pub fn report(self, message: impl Into<String>) -> Self {
        let message = message.into();
        self.update(|state| {
            if state.message.is_some() {
                return Err(ModelError::DuplicateReport);
            }
            if message.is_empty() {
                return Err(ModelError::MissingReport);
            }
            state.message = Some(message);
            Ok(())
        })
    }

    pub fn at(self, location: Location) -> Self {
        self.update(|state| {
            if state.location.is_some() {
                return Err(ModelError::MisplacedStep {
                    step: "at",
                    reason: "at() given twice",
                });
            }
            state.location = Some(location);
            Ok(())
        })
    }

    pub fn finish(self) -> Result<TaintFlowQuery, ModelError> {
        let mut state = self.state?;
        let index = state.done.len();
        let flow = close(&mut state.segment, index)?;
        state.done.push(flow);
        let message = state.message.ok_or(ModelError::MissingReport)?;
        Ok(TaintFlowQuery {
            flows: state.done,
            message,
            location: state.location.unwrap_or_default(),
        })
    }

    fn flow_step(
        self,
        step: &'static str,
        f: impl FnOnce(&mut Segment) -> Result<(), &'static str>,
    ) -> Self {
        self.update(|state| {
            if state.message.is_some() {
                return Err(ModelError::MisplacedStep {
                    step,
                    reason: "flow steps must come before report()",
                });
            }
            f(&mut state.segment).map_err(|reason| ModelError::MisplacedStep { step, reason })
        })
    }

    fn update(self, f: impl FnOnce(&mut QueryState) -> Result<(), ModelError>) -> Self {
        let state = self.state.and_then(|mut state| f(&mut state).map(|()| state));
        QueryBuilder { state }
    }
}

fn close(segment: &mut Segment, index: usize) -> Result<TaintFlow, ModelError> {
    if segment.is_empty() {
        return Err(ModelError::IncompleteFlow { flow: index });
    }
    let seg = core::mem::take(segment);
    match (seg.from, seg.to) {
        (Some(from), Some(to)) => Ok(TaintFlow {
            from,
            through: seg.through,
            not_through: seg.not_through,
            to,
        }),
        _ => Err(ModelError::IncompleteFlow { flow: index }),
    }
}
