use std::fs;
use std::path::{Path, PathBuf};

use tql::corpus::{find_manifests, run_corpus};
use tql::{EngineKind, Manifest};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

const CATEGORIES: [&str; 11] = [
    "sqli",
    "xpath",
    "command-injection",
    "xml-injection",
    "ldap-injection",
    "xss",
    "open-redirect",
    "nosqli",
    "trust-boundary",
    "path-traversal",
    "log-injection",
];

#[test]
fn whole_corpus_passes() {
    let report = run_corpus(&corpus(), None).unwrap();
    assert!(report.passed(), "{}", report.render_text());
    assert!(report.cases.len() >= 44);
}

#[test]
fn every_category_has_both_variants() {
    for c in CATEGORIES {
        for (variant, found) in [("vulnerable", true), ("sanitized", false)] {
            let path = corpus().join(c).join(format!("{variant}.manifest.json"));
            let m: Manifest = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
            assert!(m.engines.is_none(), "{c} must hold for both engines");
            let total: usize = m.expect.values().map(|e| e.count).sum();
            assert_eq!(total > 0, found, "{c}/{variant}");
        }
    }
}

#[test]
fn engine_filter_and_pinning() {
    let report = run_corpus(&corpus().join("branch-divergence"), Some(EngineKind::Dynamic)).unwrap();
    assert!(report.passed());
    assert_eq!(report.cases.len(), 1);
    assert_eq!(report.cases[0].actual.count, 0);
}

#[test]
fn mismatches_and_bad_manifests_fail() {
    let dir = tempfile::tempdir().unwrap();
    let src = corpus().join("log-injection");
    for f in ["vulnerable.tl", "queries.tq"] {
        fs::copy(src.join(f), dir.path().join(f)).unwrap();
    }
    let queries = fs::read_to_string(src.join("queries.tq")).unwrap().replace("../common/web.tq", "web.tq");
    fs::write(dir.path().join("queries.tq"), queries).unwrap();
    fs::copy(corpus().join("common/web.tq"), dir.path().join("web.tq")).unwrap();

    let wrong = r#"{"program": "vulnerable.tl", "queries": "queries.tq", "expect": {"logInjection": {"count": 2, "traces": []}}}"#;
    fs::write(dir.path().join("a.manifest.json"), wrong).unwrap();
    let unknown = r#"{"program": "vulnerable.tl", "queries": "queries.tq", "expect": {"nope": {"count": 0, "traces": []}}}"#;
    fs::write(dir.path().join("b.manifest.json"), unknown).unwrap();

    assert_eq!(find_manifests(dir.path()).unwrap().len(), 2);
    let report = run_corpus(dir.path(), None).unwrap();
    assert!(!report.passed());
    assert_eq!(report.cases.len(), 2);
    assert!(report.cases.iter().all(|c| !c.passed() && c.actual.count == 1));
    assert_eq!(report.errors.len(), 1);
    assert!(report.errors[0].1.contains("nope"));
    let text = report.render_text();
    assert!(text.contains("FAIL a.manifest.json [static] logInjection"));
    assert!(text.contains("ERROR b.manifest.json"));
}

#[test]
fn corpus_json_is_deterministic() {
    let a = run_corpus(&corpus(), None).unwrap().render_json();
    let b = run_corpus(&corpus(), None).unwrap().render_json();
    assert_eq!(a, b);
}
