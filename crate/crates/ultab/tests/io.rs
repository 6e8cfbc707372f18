use std::collections::BTreeSet;

use ultab::dot::{model_dot, poset_dot};
use ultab::io::{load_model, load_poset, parse_any, parse_model, parse_poset, poset_json, save_model, save_poset, FileError, Loaded};
use ultab_core::canon::is_isomorphic;
use ultab_core::families::{figure2_pair, q_poset};
use ultab_core::Poset;

fn schema_path(e: FileError) -> String {
    match e {
        FileError::Schema { path, .. } => path,
        other => panic!("expected schema error, got {other}"),
    }
}

/// Covers recomputed from `leq` alone: a < b with nothing strictly between.
fn cover_count(p: &Poset) -> usize {
    let n = p.len();
    let lt = |a: usize, b: usize| a != b && p.leq(a, b);
    (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| lt(a, b) && !(0..n).any(|c| lt(a, c) && lt(c, b)))
        .count()
}

#[test]
fn poset_round_trip() {
    for i in 1..=8 {
        let q = q_poset(i).unwrap();
        let back = parse_poset(&poset_json(&q)).unwrap();
        assert_eq!(back.names(), q.names());
        assert!(is_isomorphic(&back, &q).is_some());
        for a in 0..q.len() {
            for b in 0..q.len() {
                assert_eq!(back.leq(a, b), q.leq(a, b));
            }
        }
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let q = q_poset(4).unwrap();
    let path = dir.path().join("q4.json");
    save_poset(&path, &q).unwrap();
    let back = load_poset(&path).unwrap();
    assert!(is_isomorphic(&back, &q).is_some());

    let (_, fork) = figure2_pair();
    let path = dir.path().join("fork.json");
    save_model(&path, &fork).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back.vars(), fork.vars());
    for w in 0..fork.len() {
        assert_eq!(back.color(w), fork.color(w));
    }
    assert!(matches!(load_poset(&dir.path().join("missing.json")), Err(FileError::Read { .. })));
}

#[test]
fn closure_computed_on_load() {
    let p = parse_poset(r#"{"worlds":["a","b","c"],"covers":[["a","b"],["b","c"]]}"#).unwrap();
    assert!(p.leq(0, 2));
    assert_eq!(p.root(), Some(0));
    let p = parse_poset(r#"{"worlds":["a","b","c"],"covers":[["a","b"],["b","c"]],"root":"a"}"#).unwrap();
    assert_eq!(p.depth(), 3);
}

#[test]
fn schema_errors_carry_paths() {
    let cases = [
        (r#"{"worlds":["a","b"],"covers":[["a","b"],["b","a"]]}"#, "covers"),
        (r#"{"worlds":["a","a"],"covers":[]}"#, "worlds[1]"),
        (r#"{"worlds":["a"],"covers":[["a","z"]]}"#, "covers[0][1]"),
        (r#"{"worlds":["a","b"],"covers":[],"root":"b"}"#, "root"),
        (r#"{"worlds":["a"],"covers":[],"extra":1}"#, "extra"),
        ("not json", "$"),
        (r#"{"worlds":"a","covers":[]}"#, "worlds"),
    ];
    for (text, want) in cases {
        let got = schema_path(parse_poset(text).unwrap_err());
        assert!(got.starts_with(want), "{text}: got path `{got}`, want `{want}`");
    }
}

#[test]
fn model_errors_carry_paths() {
    let base = r#""worlds":["r","t"],"covers":[["r","t"]],"vars":["p"]"#;
    let bad_monotone = format!(r#"{{{base},"colors":{{"r":"1","t":"0"}}}}"#);
    assert_eq!(schema_path(parse_model(&bad_monotone).unwrap_err()), "colors");
    let bad_width = format!(r#"{{{base},"colors":{{"r":"0","t":"10"}}}}"#);
    assert_eq!(schema_path(parse_model(&bad_width).unwrap_err()), "colors.t");
    let missing = format!(r#"{{{base},"colors":{{"r":"0"}}}}"#);
    assert_eq!(schema_path(parse_model(&missing).unwrap_err()), "colors");
    let good = format!(r#"{{{base},"colors":{{"r":"0","t":"1"}}}}"#);
    let m = parse_model(&good).unwrap();
    assert_eq!(m.color(1), 1);
    assert!(matches!(parse_any(&good).unwrap(), Loaded::Model(_)));
    assert!(matches!(parse_any(r#"{"worlds":["a"],"covers":[]}"#).unwrap(), Loaded::Poset(_)));
}

fn dot_counts(dot: &str) -> (usize, usize, usize) {
    let nodes: BTreeSet<&str> = dot
        .lines()
        .map(str::trim)
        .filter(|l| l.starts_with('"') && !l.contains("->"))
        .collect();
    let edges = dot.lines().filter(|l| l.contains("->")).count();
    let ranks = dot.lines().filter(|l| l.contains("rank=same")).count();
    (nodes.len(), edges, ranks)
}

#[test]
fn dot_draws_hasse_diagram() {
    for i in 1..=8 {
        let q = q_poset(i).unwrap();
        let (nodes, edges, ranks) = dot_counts(&poset_dot(&q));
        assert_eq!(nodes, q.len(), "Q{i}");
        assert_eq!(edges, cover_count(&q), "Q{i}");
        assert_eq!(ranks, q.depth(), "Q{i}");
    }
    let q5 = q_poset(5).unwrap();
    let (nodes, edges, _) = dot_counts(&poset_dot(&q5));
    assert_eq!((nodes, edges), (6, 8));

    let (_, fork) = figure2_pair();
    let dot = model_dot(&fork);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot_counts(&dot).1, 2);
    assert!(dot.contains("\\n1"));
}
