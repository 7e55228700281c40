use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn diffinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffinv")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("diffinv-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

const KEYS: [&str; 7] = ["command", "identity", "n", "mode", "trials", "seed", "status"];

fn check_schema(line: &str) -> Value {
    let v: Value = serde_json::from_str(line).unwrap();
    let obj = v.as_object().unwrap();
    for k in KEYS {
        assert!(obj.contains_key(k), "missing {k} in {line}");
    }
    for k in obj.keys() {
        assert!(KEYS.contains(&k.as_str()) || k == "witness", "unexpected key {k}");
    }
    assert_eq!(v["command"], "verify");
    v
}

#[test]
fn minor_law_in_evaluation_mode() {
    let o = diffinv(&["verify", "minor-law", "3", "--n", "2", "--mode", "eval", "--trials", "5", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("pass"), "{text}");
    assert!(text.contains("evaluation-level evidence (5 trials)"));
}

#[test]
fn json_reports() {
    let o = diffinv(&["verify", "eq2", "--n", "2", "--mode", "eval", "--trials", "5", "--seed", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = check_schema(stdout(&o).trim());
    assert_eq!(v["identity"], "eq2");
    assert_eq!(v["n"], 2);
    assert_eq!(v["mode"], "eval");
    assert_eq!(v["trials"], 5);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["status"], "pass");
    assert!(v.get("witness").is_none());

    let o = diffinv(&["verify", "theorem2", "--n", "2", "--json"]);
    for line in stdout(&o).lines() {
        let v = check_schema(line);
        assert_eq!(v["mode"], "symbolic");
        assert_eq!(v["seed"], Value::Null);
    }
}

#[test]
fn failing_check_exits_one_with_witness() {
    let cat = scratch(
        "bad.toml",
        r#"
[[group]]
name = "not-invariant"
n = 2
sampler = "o2"
phi = ["x1"]
p = "dot(x, D(x))"
"#,
    );
    let o = diffinv(&["--catalog", cat.to_str().unwrap(), "verify", "group", "not-invariant", "--n", "2", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let failed: Vec<Value> =
        stdout(&o).lines().map(check_schema).filter(|v| v["status"] == "fail").collect();
    assert!(!failed.is_empty());
    let w = failed[0]["witness"].as_object().unwrap();
    for k in ["trial", "assignment", "lhs", "rhs", "labels"] {
        assert!(w.contains_key(k));
    }
    assert_ne!(w["lhs"], w["rhs"]);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["verify", "bogus", "--n", "2"],
        vec!["verify", "weight", "p2", "--n", "2"],
        vec!["verify", "eq2"],
        vec!["derive", "x1^(1/2)"],
        vec!["invariant", "p7", "--n", "2"],
        vec!["signature", "/nonexistent/curve", "--t0", "1", "--group", "gl-affine"],
    ] {
        assert_eq!(diffinv(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn printing_commands() {
    let o = diffinv(&["invariant", "p1", "--n", "2"]);
    let text = stdout(&o);
    assert!(text.contains("1/3*D(a2)") && text.contains("2/9*a2^2"), "{text}");
    assert_eq!(stdout(&diffinv(&["derive", "x1*D(x2)"])).trim(), "D(x1)*D(x2) + x1*D(x2,2)");
    assert_eq!(stdout(&diffinv(&["act", "x1", "--h", "0,1;1,0", "--h0", "1,0"])).trim(), "1 + x2");
    assert_eq!(stdout(&diffinv(&["act", "D(x1)", "--h", "0,1;1,0", "--h0", "1,0"])).trim(), "D(x2)");
    assert_eq!(stdout(&diffinv(&["reparam", "D(x1)*D(x2)", "--g"])).trim(), "D(x1)*D(x2)/g^2");
    let o = diffinv(&["reparam", "1/2*D(dot(x, x))", "--p", "dot(x, D(x))", "--n", "2"]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn signatures_and_equivalence() {
    let c1 = scratch("cusp.txt", "# the cusp\nt^2\nt^3\n");
    let c2 = scratch("moved.txt", "2*(t + 1)^2 + (t + 1)^3 + 1\n(t + 1)^3 - 3\n");
    let c3 = scratch("other.txt", "t^2\nt^3 + t^4\n");
    let o = diffinv(&["signature", c1.to_str().unwrap(), "--t0", "1", "--group", "gl-affine"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "W1/W^delta = 3/50\nW2/W^delta = -1/2\n");

    let o = diffinv(&["equiv", c1.to_str().unwrap(), c2.to_str().unwrap(), "--t01", "2", "--t02", "1", "--group", "gl-affine"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("signatures-equal"));

    let o = diffinv(&["equiv", c1.to_str().unwrap(), c3.to_str().unwrap(), "--t01", "1", "--t02", "1", "--group", "gl-affine", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["status"], "signatures-differ");

    let line = scratch("line.txt", "t\nt^2\n");
    let o = diffinv(&["signature", line.to_str().unwrap(), "--t0", "1", "--group", "gl-affine"]);
    assert_eq!(o.status.code(), Some(1));
}
