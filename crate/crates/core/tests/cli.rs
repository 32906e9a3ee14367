// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn dfgprint(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfgprint"))
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "0")
        .args(args)
        .output()
        .expect("spawn dfgprint")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dfgprint(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn ingest_simplify_db_score_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "3", "synth", "miner-mixrounds", "-o", "m.trace", "--rounds", "20"]);
    ok(d, &["--max-edges", "400", "ingest", "m.trace", "-o", "raw.fp"]);
    let table = ok(d, &["simplify", "raw.fp", "-o", "fp.fp", "--name", "mix"]);
    assert!(table.contains("mix"), "{table}");
    ok(d, &["db", "init", "db"]);
    ok(d, &["db", "add", "db", "fp.fp"]);
    assert!(ok(d, &["db", "list", "db"]).starts_with("mix\t"));

    let out = dfgprint(d, &["--format", "json", "score", "fp.fp", "--db", "db"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["max_score"], 1.0);
    assert_eq!(v["verdict"], "malicious");
    std::fs::write(d.join("v.json"), &out.stdout).unwrap();
    std::fs::write(d.join("labels"), "mix malicious\n").unwrap();
    let m = ok(d, &["eval", "--labels", "labels", "v.json"]);
    assert!(m.contains("accuracy     1.0000"), "{m}");

    let mx = ok(d, &["--format", "json", "matrix", "fp.fp"]);
    let mx: serde_json::Value = serde_json::from_str(&mx).unwrap();
    assert_eq!(mx["scores"][0][0], 1.0);

    ok(d, &["db", "remove", "db", "mix"]);
    assert_eq!(ok(d, &["db", "list", "db"]), "");
}

#[test]
fn benign_score_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "miner-sha2like", "-o", "m.trace", "--rounds", "10"]);
    ok(d, &["synth", "benign-convolution", "-o", "b.trace", "--rounds", "10"]);
    ok(d, &["ingest", "m.trace", "-o", "m.fp"]);
    ok(d, &["ingest", "b.trace", "-o", "b.fp"]);
    ok(d, &["db", "init", "db"]);
    ok(d, &["db", "add", "db", "m.fp"]);
    let out = dfgprint(d, &["score", "b.fp", "--db", "db"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict benign"));
}

#[test]
fn failures_exit_one_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        &["ingest", "missing.trace", "-o", "x.fp"][..],
        &["--threshold", "1.5", "quality", "--samples", "1"],
        &["--k", "0", "matrix", "x.fp"],
        &["db", "list", "nowhere"],
        &["no-such-command"],
        &["reduction-report", "a", "b", "c"],
    ] {
        let out = dfgprint(d, args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg"), "format = json\nseed = 4\n").unwrap();
    let json = ok(d, &["--config", "cfg", "quality", "--samples", "20"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["seed"], 4);
    let json = ok(d, &["--config", "cfg", "--seed", "9", "quality", "--samples", "20"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["seed"], 9);
    std::fs::write(d.join("bad"), "n = five\n").unwrap();
    let out = dfgprint(d, &["--config", "bad", "quality"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn oracle_simplify_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("t.trace"),
        "#dfgtrace v1 resolved dir=consumer-to-operand\n\
         EVENT 0 i32.const\nEVENT 1 xor 0\nEVENT 2 xor 0\nEVENT 3 and 1 2\n",
    )
    .unwrap();
    ok(d, &["ingest", "t.trace", "-o", "g.fp"]);
    ok(d, &["--max-edges", "unbounded", "ingest", "t.trace", "-o", "u.fp"]);
    ok(d, &["simplify", "--oracle", "g.fp", "-o", "s.fp"]);
    let dot = ok(d, &["dot", "s.fp"]);
    assert_eq!(dot.matches("label=\"xor\"").count(), 1, "{dot}");
    let rr = ok(d, &["reduction-report", "g.fp", "s.fp"]);
    assert!(rr.contains("25.0%"), "{rr}");
}
