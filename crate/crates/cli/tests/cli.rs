use std::process::{Command, Output};

use serde_json::Value;

fn klverify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klverify")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn lemma_4_5_matches_for_small_d() {
    let out = klverify(&["verify", "lemma-4.5", "--d", "1..3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["version"], 1);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r["status"], "MATCH");
        assert_eq!(r["computed"], 1);
        assert!(!r["citation"].as_str().unwrap().is_empty());
    }
}

#[test]
fn contested_rows_do_not_fail_the_run() {
    let out = klverify(&["verify", "lemma-4.8", "--d", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["class"] == "CONTESTED" && r["target_value"] == -1));
}

#[test]
fn table1_has_six_rows_and_an_honest_exit_code() {
    let out = klverify(&["verify", "table1"]);
    let rows = json(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 6);
    let targets: Vec<i64> = rows.iter().map(|r| r["target_value"].as_i64().unwrap()).collect();
    assert_eq!(targets, vec![2, 4, 4, 4, 2, 6]);
    let all_match = rows.iter().all(|r| r["status"] == "MATCH");
    assert_eq!(out.status.code(), Some(if all_match { 0 } else { 1 }));
}

#[test]
fn identical_invocations_give_identical_json() {
    let a = klverify(&["verify", "lemma-4.6", "--d", "1,2", "--seed", "3"]);
    let b = klverify(&["verify", "lemma-4.6", "--d", "1,2", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["invocation"]["options"]["seed"], 3);
}

#[test]
fn csv_and_markdown() {
    let out = klverify(&["verify", "lemma-4.7", "--d", "1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "target,params,citation,interpretation,computed,target_value,status,ms");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains(",MATCH,"));

    let out = klverify(&["verify", "table1", "--family", "B", "--format", "markdown"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Dimension, parity and Euler characteristics"));
    assert!(text.contains("Table 1"));
}

#[test]
fn trace_examples() {
    for args in [
        ["trace", "--family", "C", "--n", "1", "--d", "1", "--p", "3"],
        ["trace", "--family", "B", "--n", "2", "--d", "1", "--p", "3"],
    ] {
        let out = klverify(&args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let doc = json(&out);
        assert_eq!(doc["x_values"].as_array().unwrap().len(), 2);
        assert!(doc["identities"].as_array().unwrap().iter().all(|r| r["status"] == "PASS"));
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["trace", "--family", "C", "--n", "1", "--d", "1", "--p", "2"],
        vec!["verify", "lemma-9.9"],
        vec!["verify", "lemma-4.5", "--family", "B"],
        vec!["verify", "table1", "--family", "D", "--d", "1", "--profile", "non-degenerate"],
        vec!["verify", "lemma-4.5", "--format", "xml"],
        vec!["verify"],
        vec!["trace", "--family", "C", "--n", "3", "--d", "2", "--p", "5"],
    ] {
        let out = klverify(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn thread_flag_overrides_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_klverify"))
        .args(["--threads", "2", "verify", "lemma-4.5", "--d", "1"])
        .env("KLVERIFY_THREADS", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_klverify"))
        .args(["verify", "lemma-4.5", "--d", "1"])
        .env("KLVERIFY_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn registry_and_derivations() {
    let out = klverify(&["registry", "--family", "C", "--n", "2", "--d", "1"]);
    let names = String::from_utf8(out.stdout).unwrap();
    assert!(names.lines().any(|l| l == "Gamma1Prime"));
    let out = klverify(&["derivation", "thm-sp", "--d", "2", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["value"], 2);
    let out = klverify(&["derivation", "prop-m-ge-3", "--d", "1", "--m", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("klverify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rows.json");
    let out = klverify(&["verify", "lemma-4.6", "--d", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["rows"][0]["status"], "MATCH");
    std::fs::remove_dir_all(dir).ok();
}
