use std::path::Path;
use std::process::{Command, Output};

use coxcode::document::DesignDocument;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coxcode")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_design(dir: &Path, w1: &str) -> String {
    let path = dir.join("design.json");
    let p = path.to_str().unwrap().to_string();
    let o = run(&["design", "--w1", w1, "--output", &p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn hexagon_document_round_trips() {
    let o = run(&["design", "--w1", "-1,0,1"]);
    assert!(o.status.success());
    let doc = DesignDocument::from_json(&stdout(&o)).unwrap();
    doc.verify().unwrap();
    let mut w = doc.w.clone();
    w.sort();
    let want: Vec<Vec<String>> = [["-1", "0", "1"], ["-1", "1", "0"], ["1", "-1", "0"], ["1", "0", "-1"]]
        .iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect();
    assert_eq!(w, want);
    assert_eq!(doc.m[0], vec!["1", "1", "1"]);
}

#[test]
fn explicit_roots_are_honoured() {
    let o = run(&["design", "--w1", "-1,0,1", "--roots", "0,-1,1;0,1,-1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = DesignDocument::from_json(&stdout(&o)).unwrap();
    assert_eq!(doc.root_permutations, vec![vec![0, -1, 1], vec![0, 1, -1]]);
    doc.verify().unwrap();

    let bad = run(&["design", "--w1", "-1,0,1", "--roots", "0,-1,1;1,-1,0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn infeasible_vector_exits_two_with_reason() {
    let o = run(&["design", "--w1", "-1,0,0,0,1"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "DesignInfeasible");
    assert!(err["message"].as_str().unwrap().contains("no size-4 orthogonal clique"));
    assert!(o.stdout.is_empty());
}

#[test]
fn unbalanced_vector_exits_two() {
    let o = run(&["design", "--w1", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn three_bit_search_flags_the_even_split() {
    let o = run(&["design", "--b", "3"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let search = doc["search"].as_array().unwrap();
    assert_eq!(search.len(), 5);
    let even = search.iter().find(|c| c["partition"] == serde_json::json!([2, 2])).unwrap();
    assert_eq!(even["feasible"], false);
    assert_eq!(even["reason"]["reason"], "too_few_permutations");
    // the searched best design is itself a loadable document
    DesignDocument::from_json(&stdout(&o)).unwrap().verify().unwrap();
}

#[test]
fn table_csv_has_one_row_per_code() {
    let o = run(&["table", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "b,w1,roots,alphas,alphas_full,negation_used");
    assert_eq!(lines.len(), 10);
}

#[test]
fn table_filter_keeps_five_bit_rows() {
    let o = run(&["table", "--b", "5", "--format", "csv"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("0.67 0.67 1.17 1.17 1.17"));
}

#[test]
fn enrz_exact_error_decreases_with_snr() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_design(dir.path(), "-3,1,1,1");
    let o = run(&["analyze", &doc, "--eta", "1:10:1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("eta,n0,p_exact,p_union,p_asymptotic,p_bit\n"));
    let p = column(&text, "p_exact");
    assert_eq!(p.len(), 10);
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    let u = column(&text, "p_union");
    assert!(p.iter().zip(&u).all(|(e, u)| e <= u));
}

#[test]
fn simulation_is_reproducible_across_runs_and_shards() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_design(dir.path(), "-1,0,1");
    let args = |shards: &'static str| {
        vec!["simulate", &doc, "--eta", "2,4", "--trials", "30000", "--seed", "11", "--shards", shards]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>()
    };
    let a = Command::new(env!("CARGO_BIN_EXE_coxcode")).args(args("1")).output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_coxcode")).args(args("1")).output().unwrap();
    let c = Command::new(env!("CARGO_BIN_EXE_coxcode")).args(args("4")).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let text = stdout(&a);
    for name in ["p_exact", "wer", "wilson_low", "wilson_high"] {
        assert_eq!(column(&text, name).len(), 2);
    }
}

#[test]
fn tampered_document_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_design(dir.path(), "-1,0,1");
    let text = std::fs::read_to_string(&doc).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["K"][1][0] = serde_json::json!("7/3");
    std::fs::write(&doc, v.to_string()).unwrap();
    let o = run(&["analyze", &doc]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "DocumentMismatch");

    std::fs::write(&doc, "{ not json").unwrap();
    assert_eq!(run(&["simulate", &doc]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "/nonexistent/design.json"]).status.code(), Some(2));
}

#[test]
fn clique_listing_marks_the_selection() {
    let o = run(&["search", "--w1", "1,-1,-3,-1,1,3", "--format", "json"]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 24);
    assert_eq!(rows.iter().filter(|r| r["selected"] == true).count(), 1);
}
