use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cscheme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cscheme")).args(args).output().expect("binary runs")
}

fn stdout_lines(o: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&o.stdout).lines().map(|l| serde_json::from_str(l).expect("JSON line")).collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_scheme_counts() {
    let o = cscheme(&["gen-scheme"]);
    assert_eq!(o.status.code(), Some(0));
    let lines = stdout_lines(&o);
    assert_eq!(lines.len(), 26);
    assert_eq!(lines[0], serde_json::json!({"level": 0, "elements": [0]}));
    assert_eq!(lines[25]["level"], 4);

    let o = cscheme(&["gen-scheme", "--levels", "0"]);
    assert_eq!(stdout_lines(&o).len(), 1);
}

#[test]
fn malformed_and_missing_specs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"entries":[{"m":1},{"m":2,"n":2,"r":0},{"m":5,"n":2,"r":0}]}"#).unwrap();
    let o = cscheme(&["gen-scheme", "--type-spec", path(&bad)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("recurrence"));

    let o = cscheme(&["gen-scheme", "--type-spec", path(&dir.path().join("absent.json"))]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(cscheme(&["no-such-command"]).status.code(), Some(3));
}

#[test]
fn gen_type_round_trips_into_gen_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("type.json");
    let o = cscheme(&["gen-type", "--levels", "3", "--out", path(&spec)]);
    assert_eq!(o.status.code(), Some(0));
    let o = cscheme(&["gen-scheme", "--type-spec", path(&spec), "--levels", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!o.stdout.is_empty());
}

#[test]
fn metrics_table_shape() {
    let o = cscheme(&["metrics", "--levels", "2"]);
    let v = &stdout_lines(&o)[0];
    assert_eq!(v["pairs"].as_array().unwrap().len(), 6);
    assert_eq!(v["pairs"][0], serde_json::json!({"a": 0, "b": 1, "rho": 1, "delta": 1}));
    assert_eq!(v["xi"][0], serde_json::json!([0, 0, 0]));
}

#[test]
fn capture_reports() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.json");
    fs::write(&fam, "[[0],[1],[2],[3],[4],[5],[6],[7],[8],[9]]").unwrap();
    let o = cscheme(&["capture", "--family", path(&fam), "--n", "2", "--levels", "1..4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout_lines(&o).iter().any(|r| r["level"] == 4));

    let o = cscheme(&["capture", "--family", path(&fam), "--n", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());

    fs::write(&fam, "[]").unwrap();
    let o = cscheme(&["capture", "--family", path(&fam), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let summary: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["reports"], 0);
}

#[test]
fn extend_traces_and_dumps() {
    let o = cscheme(&["extend", "--horizon", "3", "--ih1", "0:0", "--ih1", "1:1"]);
    assert_eq!(o.status.code(), Some(0));
    let lines = stdout_lines(&o);
    assert_eq!(lines[0]["step"], 0);
    assert!(lines.iter().any(|l| l.get("met").is_some()));
    assert!(lines.iter().any(|l| l["elements"].as_array().is_some_and(|e| e.iter().any(Value::is_array))));
    assert_eq!(o.stdout, cscheme(&["extend", "--horizon", "3", "--ih1", "0:0", "--ih1", "1:1"]).stdout);
}

#[test]
fn ad_represent_entangled_metric() {
    assert_eq!(cscheme(&["ad"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let poset = dir.path().join("poset.json");
    fs::write(&poset, r#"{"elements":["a","b","c"],"lt":[["a","b"],["a","c"]]}"#).unwrap();
    let o = cscheme(&["represent", "--poset", path(&poset), "--s", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout_lines(&o).iter().any(|j| j["verdict"] == "agree"));

    let o = cscheme(&["entangled", "--levels", "2", "--realize", ">"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(cscheme(&["entangled", "--levels", "4"]).status.code(), Some(3));
    assert_eq!(cscheme(&["entangled", "--type-spec", "/nonexistent"]).status.code(), Some(2));

    let lm = dir.path().join("lm.json");
    fs::write(&lm, r#"{"k":2,"matrix":[["0","1/2","1"],["1/2","0","1/2"],["1","1/2","0"]]}"#).unwrap();
    let o = cscheme(&["metric", "--level-metrics", path(&lm)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_lines(&o).len(), 45);
    fs::write(&lm, r#"{"k":2,"matrix":[["0","1/2"],["1/2","0"]]}"#).unwrap();
    assert_eq!(cscheme(&["metric", "--level-metrics", path(&lm)]).status.code(), Some(3));

    let o = cscheme(&["metric", "--search"]);
    assert_eq!(stdout_lines(&o)[0]["outcome"], "found");
}

#[test]
fn verify_contract() {
    let o = cscheme(&["verify", "--zero"]);
    assert_eq!(o.status.code(), Some(0));
    for r in stdout_lines(&o) {
        assert_eq!(r["cases"], 0);
        assert!(r["warnings"].as_array().unwrap().iter().any(|w| w == "0 cases"));
    }

    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("t4.jsonl");
    cscheme(&["gen-scheme", "--out", path(&dump)]);
    assert_eq!(cscheme(&["verify", "--dump", path(&dump)]).status.code(), Some(0));
    let text = fs::read_to_string(&dump).unwrap().replace(r#""elements":[0,1]}"#, r#""elements":[0,3]}"#);
    fs::write(&dump, text).unwrap();
    let o = cscheme(&["verify", "--dump", path(&dump)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout_lines(&o)[0]["counterexample"].is_object());
}

#[test]
fn verify_is_byte_deterministic() {
    let a = cscheme(&["verify"]);
    let b = cscheme(&["verify"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_lines(&a).len(), 11);
}
