use proptest::prelude::*;
use tql_core::eval::to_tas;
use tql_core::query::{
    method, parse_signature, taint_flow_query, validate, Location, MethodSet, MethodSpec, QueryRoot,
};
use tql_core::text::{parse_root, render};

const TYPES: [&str; 6] = ["String", "int", "Object", "char[]", "DBObject", "boolean"];
const NAMES: [&str; 5] = ["get", "put", "exec", "append", "load"];

fn signature() -> impl Strategy<Value = String> {
    (
        prop::sample::select(&TYPES[..]),
        prop::sample::select(&NAMES[..]),
        prop::collection::vec(prop::sample::select(&TYPES[..]), 0..3),
    )
        .prop_map(|(ret, name, params)| format!("{ret} {name}({})", params.join(", ")))
}

/// Raw builder steps: `in`/`out` switches plus value selections.
#[derive(Debug, Clone)]
enum Step {
    In,
    Out,
    Return,
    This,
    Param(usize),
}

fn steps() -> impl Strategy<Value = Vec<Step>> {
    prop::collection::vec(
        prop_oneof![
            Just(Step::In),
            Just(Step::Out),
            Just(Step::Return),
            Just(Step::This),
            (0usize..3).prop_map(Step::Param),
        ],
        0..6,
    )
}

fn build(sig: &str, steps: &[Step]) -> Option<MethodSpec> {
    let mut b = method(sig);
    for s in steps {
        b = match s {
            Step::In => b.r#in(),
            Step::Out => b.out(),
            Step::Return => b.return_value(),
            Step::This => b.this_object(),
            Step::Param(k) => b.param(*k),
        };
    }
    b.finish().ok()
}

fn spec() -> impl Strategy<Value = MethodSpec> {
    (signature(), steps()).prop_filter_map("builder rejects", |(sig, steps)| build(&sig, &steps))
}

/// Random roots: named specs, sets over them, and queries whose
/// participants are named specs, registered sets or inline specs.
fn root() -> impl Strategy<Value = QueryRoot> {
    (
        prop::collection::vec(spec(), 1..6),
        prop::collection::vec(prop::collection::vec(0usize..6, 1..4), 0..3),
        prop::collection::vec(
            (
                prop::collection::vec((0usize..12, prop::collection::vec(0usize..12, 0..3), 0usize..12, 0usize..12), 1..3),
                prop::sample::select(&[Location::Source, Location::Sink, Location::SourceAndSink][..]),
                "[a-z][a-z .-]{0,12}",
            ),
            0..3,
        ),
        spec(),
    )
        .prop_map(|(specs, sets, queries, inline)| {
            let mut root = QueryRoot::new();
            for (k, s) in specs.iter().enumerate() {
                root.add_method(&format!("m{k}"), s.clone()).unwrap();
            }
            let mut named_sets = Vec::new();
            for (k, members) in sets.iter().enumerate() {
                let mut set = MethodSet::new(format!("s{k}"));
                for &m in members {
                    set = set.add(specs[m % specs.len()].clone());
                }
                root.add_set(set.clone()).unwrap();
                named_sets.push(set);
            }
            let pick = |i: usize| -> tql_core::query::FlowParticipant {
                let slots = specs.len() + named_sets.len() + 1;
                let i = i % slots;
                if i < specs.len() {
                    specs[i].clone().into()
                } else if i < specs.len() + named_sets.len() {
                    named_sets[i - specs.len()].clone().into()
                } else {
                    inline.clone().into()
                }
            };
            for (k, (flows, loc, message)) in queries.into_iter().enumerate() {
                let mut b = taint_flow_query();
                for (j, (from, through, not, to)) in flows.iter().enumerate() {
                    if j > 0 {
                        b = b.and();
                    }
                    b = b.from(pick(*from));
                    for &t in through {
                        b = b.through(pick(t));
                    }
                    b = b.not_through(pick(*not)).to(pick(*to));
                }
                let q = b.report(message).at(loc).finish().expect("query");
                root.add_query(&format!("q{k}"), q).unwrap();
            }
            root
        })
}

fn reference_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in s.chars() {
        if c.is_whitespace() || "(),".contains(c) {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            word.push(c);
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(root in root()) {
        let text = render(&root);
        let back = parse_root(&text).unwrap();
        prop_assert_eq!(back, root, "{}", text);
    }

    #[test]
    fn accepted_roots_yield_well_formed_tas(root in root()) {
        if validate(&root).is_empty() {
            for q in root.queries.values() {
                for flow in q.flows() {
                    let tas = to_tas(flow);
                    prop_assert!(tas.check().is_ok());
                    prop_assert!(tas.sources.iter().all(|s| s.out_values().next().is_some()));
                    prop_assert!(tas.sinks.iter().all(|s| s.in_values().next().is_some()));
                    prop_assert!(tas.sanitizers.iter().all(|s| s.in_values().next().is_some()));
                }
            }
        }
    }

    #[test]
    fn method_sets_keep_first_occurrence(picks in prop::collection::vec(0usize..4, 0..10)) {
        let pool: Vec<MethodSpec> = ["String a()", "String b()", "String a( )", "int c(int)"]
            .iter()
            .map(|s| method(s).out().return_value().finish().unwrap())
            .collect();
        let mut set = MethodSet::new("s");
        let mut expected: Vec<MethodSpec> = Vec::new();
        for &i in &picks {
            set = set.add(pool[i].clone());
            if !expected.contains(&pool[i]) {
                expected.push(pool[i].clone());
            }
        }
        prop_assert_eq!(set.members(), &expected[..]);
    }

    #[test]
    fn signature_whitespace_is_insignificant(sig in signature(), pads in prop::collection::vec(0usize..3, 16)) {
        let tokens = reference_tokens(&sig);
        let mut noisy = String::new();
        for (k, t) in tokens.iter().enumerate() {
            let word = |s: &str| !"(),".contains(s);
            let mut pad = pads[k % pads.len()];
            if k > 0 && word(t) && word(&tokens[k - 1]) {
                pad = pad.max(1);
            }
            noisy.push_str(&" \t"[..pad]);
            noisy.push_str(t);
        }
        noisy.push_str(&" ".repeat(pads[0]));
        let clean = parse_signature(&sig).unwrap();
        let fuzzed = parse_signature(&noisy).unwrap();
        prop_assert_eq!(&fuzzed, &clean);
        prop_assert_eq!(reference_tokens(&clean.to_string()), tokens);
    }
}

#[test]
fn running_example_queries_round_trip() {
    let src = include_str!("fixtures/password.tq");
    let root = parse_root(src).unwrap();
    assert!(validate(&root).is_empty());
    let text = render(&root);
    assert_eq!(parse_root(&text).unwrap(), root);
    assert_eq!(render(&parse_root(&text).unwrap()), text);
    assert_eq!(root.queries["noSQLi2"].flows().len(), 3);
}
