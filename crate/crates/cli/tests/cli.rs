use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latticelab"))
        .args(args)
        .env_remove("LATTICELAB_SEED")
        .output()
        .expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON object per line"))
        .collect()
}

fn config(text: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(text.as_bytes()).unwrap();
    file
}

#[test]
fn eval_euclidean_norm() {
    let out = run(&["space", "eval", "--space", r#"{"lp": 2}"#, "--f", "3,4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["id"], "space.eval");
    assert!((lines[0]["value"].as_f64().unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn named_spaces_from_config() {
    let cfg = config(r#"{"measure": [1, 2], "spaces": {"a": {"lp": 1}, "b": {"sum": ["a", {"lp": "inf"}]}}}"#);
    let path = cfg.path().to_str().unwrap();
    let out = run(&["--config", path, "space", "eval", "--space", "a", "--f", "1,-1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json_lines(&out)[0]["value"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    let out = run(&["--config", path, "space", "eval", "--space", "b", "--f", "1,-1", "--format", "json"]);
    assert!((json_lines(&out)[0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn power_core_check_passes() {
    let out = run(&["check", "power-core", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let lines = json_lines(&out);
    assert_eq!(lines[0]["id"], "power-core");
    assert_eq!(lines[0]["passed"], true);
    assert!(lines[0]["margins"].is_object());
}

#[test]
fn identity_concavity_on_sup_norm() {
    let op = r#"{"matrix": [[1, 0], [0, 1]], "domain": {"lp": "inf"}, "codomain": {"l": "inf"}}"#;
    let out = run(&["const", "concavity", "--op", op, "--q", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_lines(&out)[0]["value"].as_f64().unwrap();
    assert!((v - 2.0).abs() < 0.04, "{v}");
}

#[test]
fn json_output_is_deterministic() {
    let args = ["--seed", "11", "const", "convexity", "--space", r#"{"lp": 1}"#, "--p", "2", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_lines(&a)[0]["seed"], 11);
}

#[test]
fn table_output_rounds() {
    let out = run(&["space", "eval", "--space", r#"{"lp": 2}"#, "--f", "1,1", "--precision", "3"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("1.414"), "{text}");
    assert!(!text.contains("1.4142"), "{text}");
}

#[test]
fn malformed_config_exits_2() {
    let cfg = config(r#"{"measure": [1, 1], "bogus": 1}"#);
    let out = run(&["--config", cfg.path().to_str().unwrap(), "space", "eval", "--space", r#"{"lp": 1}"#, "--f", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn bad_input_exits_2() {
    let out = run(&["space", "eval", "--space", "missing", "--f", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["space", "eval", "--space", r#"{"lp": 2}"#, "--f", "1,2,3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["check", "no-such-check"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cyclic_definitions_are_rejected() {
    let cfg = config(r#"{"spaces": {"a": {"power": "b", "p": 2}, "b": {"power": "a", "p": 2}}}"#);
    let out = run(&["--config", cfg.path().to_str().unwrap(), "space", "eval", "--space", "a", "--f", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cyclic"));
}

#[test]
fn skipped_checks_exit_3() {
    let cfg = config(
        r#"{"measure": [1, 1], "checks": {"maurey-rosenthal": {
            "operator": {"diagonal": [2, 1], "domain": {"lp": 2}}, "q": 0.5}}}"#,
    );
    let out = run(&["--config", cfg.path().to_str().unwrap(), "check", "maurey-rosenthal", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
    let lines = json_lines(&out);
    assert_eq!(lines[0]["status"], "skip");
    assert_eq!(lines[0]["passed"], false);
}

#[test]
fn divergent_constants_print_inf() {
    // A vanishing weight makes the identity unbounded in practice.
    let op = r#"{"matrix": [[1, 0], [0, 1]], "domain": {"lp": 1, "weights": [1, 1e-30]}}"#;
    let out = run(&["const", "concavity", "--op", op, "--q", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let line = &json_lines(&out)[0];
    assert_eq!(line["value"], "inf");
    assert!(line["notes"][0].as_str().unwrap().starts_with("divergent"));
}

#[test]
fn measure_commands() {
    let op = r#"{"matrix": [[1, 1]], "domain": {"lp": 2}}"#;
    let out = run(&["measure", "semivar", "--op", op, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json_lines(&out)[0]["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let out = run(&["measure", "integrate", "--op", op, "--f", "3,-4", "--format", "json"]);
    assert_eq!(json_lines(&out)[0]["value"][0].as_f64().unwrap(), -1.0);
}
