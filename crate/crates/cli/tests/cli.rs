use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_node-opener"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn theta(t: f64) -> Value {
    json!({
        "graph": {"vertices": ["a", "b"], "edges": [
            {"id": "e1", "from": "a", "to": "b"},
            {"id": "e2", "from": "a", "to": "b"}]},
        "surface": {"rho": 0.25, "family": "translation",
            "points": {"e1": {"minus": [-1, 0], "plus": [-1, 0]},
                       "e2": {"minus": [1, 0], "plus": [1, 0]}},
            "t": {"e1": [t, 0], "e2": [0, t]}},
        "periods": {"cycle": [["e1", 1], ["e2", -1]]}
    })
}

/// `2 × len` ladder with period 1 around the first square.
fn strip(len: usize, t: f64) -> Value {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for i in 0..len {
        vertices.push(format!("a{i}"));
        vertices.push(format!("b{i}"));
        edges.push((format!("r{i:02}"), format!("a{i}"), format!("b{i}")));
        if i + 1 < len {
            edges.push((format!("ta{i:02}"), format!("a{i}"), format!("a{}", i + 1)));
            edges.push((format!("tb{i:02}"), format!("b{i}"), format!("b{}", i + 1)));
        }
    }
    let choices = [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]];
    let mut used = std::collections::HashMap::new();
    let mut next = |v: &str| {
        let k = used.entry(v.to_string()).or_insert(0usize);
        *k += 1;
        choices[*k - 1]
    };
    let mut points = serde_json::Map::new();
    let mut ts = serde_json::Map::new();
    for (id, from, to) in &edges {
        points.insert(id.clone(), json!({"minus": next(from), "plus": next(to)}));
        ts.insert(id.clone(), json!([t, 0.0]));
    }
    json!({
        "graph": {"vertices": vertices,
                  "edges": edges.iter().map(|(id, f, t)| json!({"id": id, "from": f, "to": t})).collect::<Vec<_>>()},
        "surface": {"rho": 0.2, "family": "translation", "points": points, "t": ts},
        "weights": {"p": "inf", "sigma": {"geometric": {"root": "a0", "ratio": 100.0}}},
        "periods": {"cycle": [["ta00", 1], ["r01", 1], ["tb00", -1], ["r00", -1]]}
    })
}

fn solve_to(dir: &Path, spec: &Path, name: &str) -> PathBuf {
    let out = dir.join(name);
    let o = run(&["solve", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn validate_reports_translation_constants() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "theta.json", &theta(1e-3));
    let o = run(&["validate", spec.to_str().unwrap()]);
    assert!(o.status.success());
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["surface"]["c1"], 1.0);
    assert_eq!(report["surface"]["c2"], 1.0);
}

#[test]
fn validate_fails_on_overlapping_disks() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = theta(1e-3);
    spec["surface"]["points"]["e2"] = json!({"minus": [-0.7, 0], "plus": [1, 0]});
    let path = write(dir.path(), "overlap.json", &spec);
    let o = run(&["validate", path.to_str().unwrap()]);
    assert!(!o.status.success());
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn validate_names_the_violated_t_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "big.json", &theta(0.1));
    let o = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failures = report["failures"].to_string();
    assert!(failures.contains("rho^2"), "{failures}");
}

#[test]
fn solve_check_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "theta.json", &theta(1e-3));
    let sol = solve_to(dir.path(), &spec, "sol.json");
    let o = run(&["check", spec.to_str().unwrap(), sol.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = report["entries"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["decay", "derivative", "neck_estimate", "node_residues", "periods", "transitions"]);

    let mut solution: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    let lambda = solution["lambda"].as_array_mut().unwrap();
    lambda[0][3] = json!(0.0);
    lambda[0][4] = json!(0.0);
    let bad = write(dir.path(), "bad.json", &solution);
    let o = run(&["check", spec.to_str().unwrap(), bad.to_str().unwrap(), "--checks", "transitions"]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["entries"][0]["status"], "fail");
}

#[test]
fn solve_is_deterministic_and_oracle_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "theta.json", &theta(2e-3));
    let a = run(&["solve", spec.to_str().unwrap(), "--oracle"]);
    let b = run(&["solve", spec.to_str().unwrap(), "--oracle", "--threads", "1"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let solution: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(solution["report"]["oracle_max_diff"].as_f64().unwrap() < 1e-11);
}

#[test]
fn eval_grid_and_singular_points() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "theta.json", &theta(1e-3));
    let sol = solve_to(dir.path(), &spec, "sol.json");
    let o = run(&["eval", spec.to_str().unwrap(), sol.to_str().unwrap(), "--vertex", "a", "--grid", "-0.5:0.5:5,-0.5:0.5:4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["re_z", "im_z", "re_w", "im_w", "status"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 20);
    for row in &rows {
        assert_eq!(&row[4], "ok");
        assert!(row[2].parse::<f64>().unwrap().is_finite());
    }

    let o = run(&["eval", spec.to_str().unwrap(), sol.to_str().unwrap(), "--vertex", "b", "--grid", "-1:1:2,0:0:1"]);
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    assert_eq!(text.matches("singular").count(), 2, "{text}");

    // Output rows can be fed back in as points.
    let first = dir.path().join("points.csv");
    std::fs::write(&first, &o.stdout).unwrap();
    let again = run(&["eval", spec.to_str().unwrap(), sol.to_str().unwrap(), "--vertex", "b", "--points", first.to_str().unwrap()]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn decay_column_is_monotone_on_the_strip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "strip.json", &strip(6, 1e-4));
    let sol = solve_to(dir.path(), &spec, "sol.json");
    let o = run(&["decay", spec.to_str().unwrap(), sol.to_str().unwrap(), "--root", "a0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let mut best = std::collections::BTreeMap::new();
    for row in reader.records() {
        let row = row.unwrap();
        let k: usize = row[1].parse().unwrap();
        let sup: f64 = row[2].parse().unwrap();
        let entry = best.entry(k).or_insert(0.0f64);
        *entry = entry.max(sup);
    }
    let sups: Vec<f64> = best.into_values().collect();
    assert!(sups[2..].windows(2).all(|w| w[1] < w[0]), "{sups:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("slope"));
}

#[test]
fn decay_at_t_zero_is_zero_beyond_the_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "strip.json", &strip(4, 0.0));
    let sol = solve_to(dir.path(), &spec, "sol.json");
    let o = run(&["decay", spec.to_str().unwrap(), sol.to_str().unwrap(), "--root", "a0"]);
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    for row in reader.records() {
        let row = row.unwrap();
        let cycle = ["a0", "a1", "b0", "b1"].contains(&&row[0]);
        let sup: f64 = row[2].parse().unwrap();
        assert_eq!(sup == 0.0, !cycle, "{row:?}");
    }
    assert!(String::from_utf8_lossy(&o.stderr).contains("vanishes"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"graph": {}}"#).unwrap();
    assert_eq!(run(&["solve", bad.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(run(&["solve", "/nonexistent/spec.json"]).status.code(), Some(4));

    let mut incompatible = theta(1e-3);
    incompatible["periods"] = json!({"e1": [1, 0], "e2": [1, 0]});
    let path = write(dir.path(), "inc.json", &incompatible);
    let o = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`a`"));

    let spec = write(dir.path(), "theta.json", &theta(1e-3));
    let o = run(&["solve", spec.to_str().unwrap(), "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(3));
}
