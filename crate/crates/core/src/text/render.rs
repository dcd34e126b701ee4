use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use crate::lex::quote;
use crate::query::{chain_suffix, FlowParticipant, MethodSet, MethodSpec, QueryRoot};

/// Canonical text for `root`: methods, then sets, then queries, each group
/// in name order. Imports are flattened into the output. Method references
/// use the first declared name bound to a structurally equal spec, and fall
/// back to an inline `method(..)` expression.
pub fn render(root: &QueryRoot) -> String {
    let mut out = String::new();
    let mut sets: BTreeMap<&str, &MethodSet> = root.method_sets.iter().map(|(k, v)| (k.as_str(), v)).collect();
    for query in root.queries.values() {
        for flow in query.flows() {
            let participants = core::iter::once(&flow.from)
                .chain(&flow.through)
                .chain(&flow.not_through)
                .chain(core::iter::once(&flow.to));
            for p in participants {
                if let FlowParticipant::Set(set) = p {
                    sets.entry(set.name()).or_insert(set);
                }
            }
        }
    }

    for (name, spec) in &root.method_specs {
        let _ = writeln!(out, "Method {name} = {};", method_expr(spec));
    }
    for (name, set) in &sets {
        let _ = write!(out, "MethodSet {name} = method_set()");
        for member in set.members() {
            let _ = write!(out, ".add({})", spec_ref(root, member));
        }
        out.push_str(";\n");
    }
    for (name, query) in &root.queries {
        let _ = write!(out, "TaintFlowQuery {name} = taint_flow_query()");
        for (i, flow) in query.flows().iter().enumerate() {
            if i > 0 {
                out.push_str("\n    .and()");
            }
            let _ = write!(out, "\n    .from({})", participant_ref(root, &flow.from));
            for stage in &flow.through {
                let _ = write!(out, ".through({})", participant_ref(root, stage));
            }
            for sanitizer in &flow.not_through {
                let _ = write!(out, ".not_through({})", participant_ref(root, sanitizer));
            }
            let _ = write!(out, ".to({})", participant_ref(root, &flow.to));
        }
        let _ = writeln!(
            out,
            "\n    .report({}).at({});",
            quote(query.message()),
            query.location()
        );
    }
    out
}

fn method_expr(spec: &MethodSpec) -> String {
    format!("method({}){}", quote(&format!("{}", spec.signature())), chain_suffix(spec))
}

fn spec_ref(root: &QueryRoot, spec: &MethodSpec) -> String {
    root.method_specs
        .iter()
        .find(|(_, s)| *s == spec)
        .map_or_else(|| method_expr(spec), |(name, _)| name.clone())
}

fn participant_ref(root: &QueryRoot, participant: &FlowParticipant) -> String {
    match participant {
        FlowParticipant::Method(spec) => spec_ref(root, spec),
        FlowParticipant::Set(set) => String::from(set.name()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{method, validate, MethodSet};
    use crate::text::parse_root;

    #[test]
    fn empty_set_renders_and_is_flagged_later() {
        let mut root = QueryRoot::new();
        root.add_set(MethodSet::new("empty")).unwrap();
        let text = render(&root);
        assert_eq!(text, "MethodSet empty = method_set();\n");
        let back = parse_root(&text).unwrap();
        assert_eq!(back, root);
        assert_eq!(validate(&back).len(), 1);
    }

    #[test]
    fn inline_fallback() {
        let mut root = QueryRoot::new();
        let named = method("String a()").out().return_value().finish().unwrap();
        let anonymous = method("String b()").out().return_value().finish().unwrap();
        root.add_method("a", named.clone()).unwrap();
        root.add_set(MethodSet::new("s").add(named).add(anonymous)).unwrap();
        let text = render(&root);
        assert!(text.contains(r#"method_set().add(a).add(method("String b()").out().return_value())"#));
        assert_eq!(parse_root(&text).unwrap(), root);
    }
}
