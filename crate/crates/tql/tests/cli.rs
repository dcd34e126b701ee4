use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn tql(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tql")).args(args).output().unwrap()
}

fn analyze(dir: &str, program: &str, extra: &[&str]) -> Output {
    let d = corpus().join(dir);
    let p = d.join(program);
    let q = d.join("queries.tq");
    let mut args = vec!["analyze", "--program", p.to_str().unwrap(), "--queries", q.to_str().unwrap()];
    args.extend_from_slice(extra);
    tql(&args)
}

#[test]
fn vulnerable_program_exits_one() {
    let out = analyze("xss", "vulnerable.tl", &["--engine", "static", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["engine"], "static");
    assert_eq!(report["findings"].as_array().unwrap().len(), 1);
    assert_eq!(report["findings"][0]["query"], "xss");
}

#[test]
fn sanitized_program_exits_zero() {
    let out = analyze("xss", "sanitized.tl", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().ends_with("no findings\n"));
}

#[test]
fn errors_exit_two() {
    let p = corpus().join("xss/vulnerable.tl");
    let out = tql(&["analyze", "--program", p.to_str().unwrap(), "--queries", "/nonexistent/q.tq"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(tql(&["analyze"]).status.code(), Some(2));
    assert_eq!(tql(&["frobnicate"]).status.code(), Some(2));
    let out = analyze("xss", "vulnerable.tl", &["--entry", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn text_report_lists_placements_and_traces() {
    let d = corpus().join("running-example");
    let out = tql(&[
        "analyze",
        "--program",
        d.join("password.tl").to_str().unwrap(),
        "--queries",
        d.join("password.tq").to_str().unwrap(),
        "--engine",
        "dynamic",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("4 findings"), "{text}");
    let block = text.split("\n\n").find(|b| b.contains("noSQLi2")).unwrap();
    assert_eq!(block.matches("  trace ").count(), 3);
    assert!(block.contains("password.tl:26"));
}

#[test]
fn json_output_is_deterministic() {
    let d = corpus().join("running-example");
    let p = d.join("password.tl");
    let q = d.join("password.tq");
    let args = [
        "analyze",
        "--program",
        p.to_str().unwrap(),
        "--queries",
        q.to_str().unwrap(),
        "--format",
        "json",
    ];
    let a = tql(&args);
    let b = tql(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn help_exits_zero() {
    let out = tql(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("corpus"));
}
