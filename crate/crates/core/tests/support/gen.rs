//! Random TQL-Lite programs over a fixed vocabulary of sensitive methods.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const QUERIES: &str = r#"
Method src = method("String src()").out().return_value();
Method fill = method("void fill(String)").out().param(0);
Method san = method("String san(String)").in().param(0).out().return_value();
Method snk = method("void snk(String)").in().param(0);
Method log = method("void log(String, String)").in().param(1);
Method p = method("String p(String)").in().param(0).out().return_value();
Method app = method("void app(String)").in().param(0).out().this_object();
MethodSet sources = method_set().add(src).add(fill);
MethodSet sinks = method_set().add(snk).add(log);
TaintFlowQuery plain = taint_flow_query().from(sources).not_through(san).to(sinks).report("plain");
TaintFlowQuery staged = taint_flow_query().from(src).through(p).not_through(san).to(sinks).report("staged");
TaintFlowQuery chained = taint_flow_query().from(sources).through(p).through(app).to(sinks).report("chained");
"#;

pub const QUERY_NAMES: [&str; 3] = ["plain", "staged", "chained"];

pub const VARS: usize = 3;
pub const CONDS: usize = 2;

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub statements: usize,
    pub branches: bool,
    pub arrays: bool,
}

fn v(rng: &mut ChaCha8Rng) -> String {
    format!("v{}", rng.gen_range(0..VARS))
}

const WEIGHTS: [u32; 14] = [3, 1, 2, 1, 1, 4, 4, 4, 1, 1, 2, 2, 2, 2];

fn simple(rng: &mut ChaCha8Rng, arrays: bool) -> String {
    let kinds = if arrays { 14 } else { 12 };
    let total: u32 = WEIGHTS[..kinds].iter().sum();
    let mut pick = rng.gen_range(0..total);
    let kind = WEIGHTS[..kinds]
        .iter()
        .position(|&w| {
            if pick < w {
                true
            } else {
                pick -= w;
                false
            }
        })
        .unwrap();
    let (a, b) = (v(rng), v(rng));
    let field = if rng.gen_bool(0.5) { "f" } else { "g" };
    let idx = rng.gen_range(0..2);
    match kind {
        0 => format!("{a} = call String src()();"),
        1 => format!("call void fill(String)({a});"),
        2 => format!("{a} = {b};"),
        3 => format!("{a} = call String san(String)({b});"),
        4 => format!("call String san(String)({a});"),
        5 => format!("{a} = call String p(String)({b});"),
        6 => format!("call {a}.void app(String)({b});"),
        7 => format!("call void snk(String)({a});"),
        8 => format!("call void log(String, String)({a}, {b});"),
        9 => format!("let {a} = \"k\";"),
        10 => format!("o.{field} = {b};"),
        11 => format!("{a} = o.{field};"),
        12 => format!("arr[{idx}] = {b};"),
        _ => format!("{a} = arr[{idx}];"),
    }
}

fn block(rng: &mut ChaCha8Rng, shape: Shape, budget: &mut usize, depth: usize, indent: usize, out: &mut Vec<String>) {
    let pad = "  ".repeat(indent);
    while *budget > 0 {
        *budget -= 1;
        if shape.branches && depth < 2 && rng.gen_bool(0.25) {
            out.push(format!("{pad}if (c{}) {{", rng.gen_range(0..CONDS)));
            let mut inner = rng.gen_range(1..=3);
            block(rng, shape, &mut inner, depth + 1, indent + 1, out);
            if rng.gen_bool(0.5) {
                out.push(format!("{pad}}} else {{"));
                let mut inner = rng.gen_range(1..=3);
                block(rng, shape, &mut inner, depth + 1, indent + 1, out);
            }
            out.push(format!("{pad}}}"));
        } else {
            out.push(format!("{pad}{}", simple(rng, shape.arrays)));
        }
        if depth > 0 && rng.gen_bool(0.3) {
            break;
        }
    }
}

/// Source text of a random single-function program; `main` takes the
/// boolean parameters `c0..` when the shape has branches.
pub fn program(seed: u64, shape: Shape) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<String> = (0..CONDS).map(|k| format!("bool c{k}")).collect();
    let header = if shape.branches {
        format!("fn void main({}) {{", params.join(", "))
    } else {
        "fn void main() {".to_string()
    };
    let mut lines = vec![header];
    for k in 0..VARS {
        lines.push(format!("  let v{k} = \"k\";"));
    }
    lines.push("  let o = null;".to_string());
    if shape.arrays {
        lines.push("  let arr = null;".to_string());
    }
    let mut budget = shape.statements;
    block(&mut rng, shape, &mut budget, 0, 1, &mut lines);
    lines.push("}".to_string());
    lines.join("\n") + "\n"
}

/// Every assignment of the condition parameters.
pub fn valuations() -> Vec<Vec<(String, bool)>> {
    (0..1u32 << CONDS)
        .map(|bits| (0..CONDS).map(|k| (format!("c{k}"), bits & (1 << k) != 0)).collect())
        .collect()
}
