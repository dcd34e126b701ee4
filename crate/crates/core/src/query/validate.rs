use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::flow::{FlowParticipant, TaintFlow};
use super::method::Direction;
use super::root::QueryRoot;

/// Position a participant occupies in a flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    From,
    Through,
    NotThrough,
    To,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::From => "from",
            Role::Through => "through",
            Role::NotThrough => "not_through",
            Role::To => "to",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// A participant used in `role` resolves to a method lacking a value of
    /// direction `needs`.
    RoleViolation {
        role: Role,
        needs: Direction,
        method: String,
    },
    /// A method set with no members.
    EmptyMethodSet,
}

impl Rule {
    pub fn id(&self) -> &'static str {
        match self {
            Rule::RoleViolation { .. } => "role-violation",
            Rule::EmptyMethodSet => "empty-method-set",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagnostic {
    /// Query or method-set name.
    pub element: String,
    /// Flow index inside the query, when the diagnostic is flow-local.
    pub flow: Option<usize>,
    pub rule: Rule,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.element)?;
        if let Some(flow) = self.flow {
            write!(f, " (flow {flow})")?;
        }
        write!(f, ": [{}] ", self.rule.id())?;
        match &self.rule {
            Rule::RoleViolation {
                role,
                needs,
                method,
            } => write!(f, "{role}() participant `{method}` needs an {needs} value"),
            Rule::EmptyMethodSet => f.write_str("method set has no members"),
        }
    }
}

/// Checks every flow against the role constraints of a taint analysis
/// specification. Returns no diagnostics for a well-formed root.
pub fn validate(root: &QueryRoot) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (name, set) in &root.method_sets {
        if set.members().is_empty() {
            out.push(Diagnostic {
                element: name.clone(),
                flow: None,
                rule: Rule::EmptyMethodSet,
            });
        }
    }
    for (name, query) in &root.queries {
        for (index, flow) in query.flows().iter().enumerate() {
            check_flow(name, index, flow, &mut out);
        }
    }
    out
}

fn check_flow(query: &str, index: usize, flow: &TaintFlow, out: &mut Vec<Diagnostic>) {
    let mut push = |role, needs, participant: &FlowParticipant| {
        for spec in participant.resolve() {
            if !spec.has(needs) {
                out.push(Diagnostic {
                    element: query.to_string(),
                    flow: Some(index),
                    rule: Rule::RoleViolation {
                        role,
                        needs,
                        method: spec.signature().to_string(),
                    },
                });
            }
        }
    };
    push(Role::From, Direction::Out, &flow.from);
    for stage in &flow.through {
        push(Role::Through, Direction::In, stage);
        push(Role::Through, Direction::Out, stage);
    }
    for sanitizer in &flow.not_through {
        push(Role::NotThrough, Direction::In, sanitizer);
    }
    push(Role::To, Direction::In, &flow.to);

    let mut empty = |role, participant: &FlowParticipant| {
        if participant.resolve().is_empty() {
            out.push(Diagnostic {
                element: query.to_string(),
                flow: Some(index),
                rule: Rule::RoleViolation {
                    role,
                    needs: if role == Role::From { Direction::Out } else { Direction::In },
                    method: participant.label(),
                },
            });
        }
    };
    empty(Role::From, &flow.from);
    empty(Role::To, &flow.to);
    for stage in &flow.through {
        empty(Role::Through, stage);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{method, taint_flow_query, MethodSet};

    fn root_with(flow_to: crate::query::MethodSpec, through: Option<crate::query::MethodSpec>) -> QueryRoot {
        let src = method("String src()").out().return_value().finish().unwrap();
        let mut b = taint_flow_query().from(src);
        if let Some(t) = through {
            b = b.through(t);
        }
        let q = b.to(flow_to).report("m").finish().unwrap();
        let mut root = QueryRoot::new();
        root.add_query("q", q).unwrap();
        root
    }

    #[test]
    fn sink_without_in_value() {
        let sink = method("String snk(String)").out().return_value().finish().unwrap();
        let diags = validate(&root_with(sink, None));
        assert_eq!(diags.len(), 1);
        assert_eq!(
            diags[0].rule,
            Rule::RoleViolation {
                role: Role::To,
                needs: Direction::In,
                method: "String snk(String)".into()
            }
        );
    }

    #[test]
    fn propagator_without_out_value() {
        let sink = method("void snk(String)").r#in().param(0).finish().unwrap();
        let prop = method("void p(String)").r#in().param(0).finish().unwrap();
        let diags = validate(&root_with(sink, Some(prop)));
        assert_eq!(diags.len(), 1);
        assert!(matches!(
            diags[0].rule,
            Rule::RoleViolation {
                role: Role::Through,
                needs: Direction::Out,
                ..
            }
        ));
        assert_eq!(diags[0].rule.id(), "role-violation");
    }

    #[test]
    fn empty_set_is_flagged() {
        let mut root = QueryRoot::new();
        root.add_set(MethodSet::new("nothing")).unwrap();
        let diags = validate(&root);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule, Rule::EmptyMethodSet);
        assert_eq!(diags[0].element, "nothing");
    }
}
