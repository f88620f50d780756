use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn wmrep(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmrep")).args(args).current_dir(dir).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn build(dir: &TempDir, example: &str, file: &str) -> PathBuf {
    let path = dir.path().join(file);
    let out = wmrep(&[example, "--out", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn value(v: &Value) -> f64 {
    v["value"].as_str().expect("decimal string").parse().unwrap()
}

#[test]
fn toledo_of_the_octagon() {
    let dir = TempDir::new().unwrap();
    build(&dir, "build-fuchsian-genus2", "f2.json");
    let out = wmrep(&["toledo", "--rep", "f2.json", "--ell", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["command"], "toledo");
    assert_eq!(r["results"]["T"]["value"], "2");
    assert_eq!(r["results"]["mw_margin"]["value"], "0");
    assert_eq!(r["results"]["winding_integer"]["value"], 2);
    assert_eq!(r["results"]["rationality"]["distance"]["value"], "0");
    assert_eq!(r["input_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    build(&dir, "build-fuchsian-genus2", "f2.json");
    build(&dir, "build-cancelling-triple", "t.json");
    for args in [
        vec!["toledo", "--rep", "t.json"],
        vec!["wm", "--rep", "t.json", "--hyp", "f2.json", "--seed", "4", "--count", "16"],
        vec!["maslov", "--seed", "2", "--count", "50", "--n", "2"],
        vec!["growth", "--seed", "2", "--steps", "40"],
    ] {
        let a = wmrep(&args, dir.path());
        let b = wmrep(&args, dir.path());
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let again = dir.path().join("again.json");
    wmrep(&["build-fuchsian-genus2", "--out", again.to_str().unwrap()], dir.path());
    assert_eq!(std::fs::read(again).unwrap(), std::fs::read(dir.path().join("f2.json")).unwrap());
}

#[test]
fn weak_maximality_verdicts() {
    let dir = TempDir::new().unwrap();
    build(&dir, "build-fuchsian-genus2", "f2.json");
    build(&dir, "build-cancelling-triple", "t.json");
    build(&dir, "build-control", "c.json");
    let ok = wmrep(&["wm", "--rep", "t.json", "--hyp", "f2.json"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let r = json(&ok);
    assert_eq!(r["results"]["verdict"], "weakly_maximal");
    assert!(value(&r["results"]["defect"]) <= 0.05);
    assert!(r["results"]["defect"]["error_estimate"].is_string());

    let bad = wmrep(&["wm", "--rep", "c.json", "--hyp", "f2.json"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(json(&bad)["results"]["verdict"], "not_weakly_maximal");

    // a hyperbolization must be a PSL(2) representation
    let err = wmrep(&["wm", "--rep", "t.json", "--hyp", "t.json"], dir.path());
    assert_eq!(err.status.code(), Some(1));
    let e: Value = serde_json::from_slice(&err.stderr).unwrap();
    assert_eq!(e["error"], "bad_hyperbolization");
}

#[test]
fn q_causal_on_a_polydisk() {
    let dir = TempDir::new().unwrap();
    build(&dir, "build-fuchsian-genus2", "f2.json");
    build(&dir, "build-polydisk", "p.json");
    let out = wmrep(&["qcausal", "--rep", "p.json", "--hyp", "f2.json", "--q", "1", "--count", "16"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["results"]["not_dominant"], 0);
    assert_eq!(r["results"]["eligible"], 16);
}

#[test]
fn growth_and_scan_tables() {
    let dir = TempDir::new().unwrap();
    let out = wmrep(&["growth", "--seed", "1", "--steps", "50", "--out", "g.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["violations"], Value::Array(vec![]));
    let csv = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,e_n,ratio,low,high,target"));
    assert_eq!(csv.lines().count(), 51);

    build(&dir, "build-fuchsian-genus2", "f2.json");
    let out = wmrep(
        &["scan", "--rep", "f2.json", "--hyp", "f2.json", "--steps", "2", "--count", "8", "--out", "s.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let rows: Vec<_> = csv.lines().collect();
    assert_eq!(rows[0], "t,toledo,defect,error");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("0,2,"));
}

#[test]
fn maslov_and_dominance() {
    let dir = TempDir::new().unwrap();
    let out = wmrep(&["maslov", "--count", "100", "--n", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["results"]["quadruples"], 100);
    assert_eq!(r["results"]["cocycle_failures"], 0);

    build(&dir, "build-sym-cube", "s.json");
    let out = wmrep(&["dominance", "--rep", "s.json", "--iters", "300"], dir.path());
    assert!(matches!(out.status.code(), Some(0 | 2)));
    assert_eq!(json(&out)["results"]["generators"].as_array().unwrap().len(), 4);
}

#[test]
fn builders_write_loadable_files() {
    let dir = TempDir::new().unwrap();
    for example in [
        "build-fuchsian-torus",
        "build-fuchsian-pants",
        "build-sym-cube",
        "build-random-free",
        "build-heisenberg",
    ] {
        let path = build(&dir, example, &format!("{example}.json"));
        let out = wmrep(&["toledo", "--rep", path.to_str().unwrap()], dir.path());
        assert_eq!(out.status.code(), Some(0), "{example}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let t = json(&wmrep(&["toledo", "--rep", "build-fuchsian-torus.json"], dir.path()));
    assert!((value(&t["results"]["T"]) - 1.0).abs() < 1e-6);
    let h = json(&wmrep(&["toledo", "--rep", "build-heisenberg.json"], dir.path()));
    assert!((value(&h["results"]["T"]) - 2.0).abs() < 1e-6);

    let stdout = wmrep(&["build-fuchsian-genus2"], dir.path());
    let spec: Value = serde_json::from_slice(&stdout.stdout).unwrap();
    assert_eq!(spec["target"]["kind"], "psl2");
    assert_eq!(spec["generators"].as_array().unwrap().len(), 4);

    build(&dir, "build-fuchsian-genus2", "f2.json");
    let out = wmrep(&["build-reversed", "--rep", "f2.json", "--out", "r.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&wmrep(&["toledo", "--rep", "r.json"], dir.path()));
    assert_eq!(r["results"]["T"]["value"], "-2");
}

#[test]
fn errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let out = wmrep(&["toledo", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));
    assert_eq!(wmrep(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(wmrep(&["--help"], dir.path()).status.code(), Some(0));

    let out = wmrep(&["toledo", "--rep", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"], "parse_error");

    let path = build(&dir, "build-fuchsian-genus2", "f2.json");
    let mut spec: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    spec["target"]["n"] = Value::from(2);
    std::fs::write(dir.path().join("bad.json"), spec.to_string()).unwrap();
    let out = wmrep(&["toledo", "--rep", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"], "schema_error");

    // shear one generator: still in SL(2), but the relator breaks
    let mut spec: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let entry = |r: usize, c: usize, s: &Value| -> f64 { s["generators"][0][r][c].as_str().unwrap().parse().unwrap() };
    for r in 0..2 {
        let shifted = entry(r, 1, &spec) + 1e-2 * entry(r, 0, &spec);
        spec["generators"][0][r][1] = Value::String(format!("{shifted:.16e}"));
    }
    std::fs::write(dir.path().join("sheared.json"), spec.to_string()).unwrap();
    let out = wmrep(&["toledo", "--rep", "sheared.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"], "relator_violation");
}
