use std::path::Path;

use std::process::Command;

use serde_json::Value;

fn qckit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qckit"))
}

fn stderr_code(out: &std::process::Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("JSON error object on stderr");
    v["error"]["code"].as_str().unwrap().to_string()
}

fn write_multiset(dir: &Path, name: &str, spec: &str) -> String {
    let path = dir.join(name);
    qckit()
        .args(["generate", "--input", spec, "--output"])
        .arg(&path)
        .status()
        .unwrap()
        .success()
        .then_some(())
        .expect("generate failed");
    path.to_str().unwrap().to_string()
}

#[test]
fn generate_round_trips() {
    let spec = r#"{"kind":"union","window":[-12,12],"lattices":[{"alpha":1,"shift":0.25},{"alpha":1.4142135623730951,"shift":0.25}]}"#;
    let out = qckit().args(["generate", "--input", spec]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let a = qckit::PointMultiset::from_json(&text).unwrap();
    let direct = qckit::generators::GeneratorSpec::from_json(spec).unwrap().generate().unwrap();
    assert_eq!(a, direct);
    assert_eq!(a.to_json().trim(), qckit::PointMultiset::from_json(&a.to_json()).unwrap().to_json().trim());
}

#[test]
fn poisson_on_self_dual_integers() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_multiset(dir.path(), "z.json", r#"{"kind":"lattice","alpha":1,"shift":0,"window":[-60,60]}"#);
    let s = qckit()
        .args(["spectrum", "--input", r#"{"kind":"lattice","alpha":1,"shift":0,"window":[-1,1]}"#, "--band", "-60:60"])
        .output()
        .unwrap();
    assert!(s.status.success());
    let spectrum = String::from_utf8(s.stdout).unwrap();
    let out = qckit()
        .args(["verify", "poisson", "--input", &a, "--spectrum", &spectrum, "--lambda-cutoff", "40", "--tolerance", "1e-12"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn evaluate_f_matches_cosine_reference() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_multiset(dir.path(), "half.json", r#"{"kind":"lattice","alpha":1,"shift":0.5,"window":[-100003,100003]}"#);
    let reference = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/cosine_reference.csv")).unwrap();
    let mut expected: Vec<Vec<f64>> = reference
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let mut got = Vec::new();
    for y in ["0.7", "-1"] {
        let out = qckit()
            .args(["evaluate", "--function", "f", "--input", &a, "--truncation", "100000", "--format", "csv"])
            .arg(format!("--grid=-3:3:0.5@{y}"))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        let header: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
        assert_eq!(header["report"]["config"]["truncation"], 100000);
        assert_eq!(lines.next(), Some("x,y,re,im"));
        got.extend(lines.map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>()));
    }
    assert_eq!(got.len(), expected.len());
    let key = |r: &Vec<f64>| (r[1].to_bits(), r[0].to_bits());
    expected.sort_by_key(key);
    got.sort_by_key(key);
    let worst = got
        .iter()
        .zip(&expected)
        .map(|(g, e)| {
            assert_eq!((g[0], g[1]), (e[0], e[1]));
            (g[2] - e[2]).hypot(g[3] - e[3])
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "max |Δ| = {worst}");
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_multiset(dir.path(), "u.json", r#"{"kind":"union","window":[-3000,3000],"lattices":[{"alpha":1,"shift":0.25},{"alpha":1.4142135623730951,"shift":0.25}]}"#);
    let run = |threads: &str| {
        qckit()
            .env("QCKIT_THREADS", threads)
            .args(["evaluate", "--function", "logderiv-direct", "--input", &a, "--truncation", "4000", "--grid", "-2:2:0.1@0.5"])
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let first = qckit().args(["almost-periods", "--input", &a, "--epsilon", "0.05", "--tau-range", "5:30"]).output().unwrap();
    let second = qckit().args(["almost-periods", "--input", &a, "--epsilon", "0.05", "--tau-range", "5:30"]).output().unwrap();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn json_keys_are_sorted() {
    let out = qckit()
        .args(["spectrum", "--input", r#"{"kind":"lattice","alpha":2,"shift":0.1,"window":[-1,1]}"#, "--band", "-2:2"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let (a, b, p) = (text.find("\"atoms\"").unwrap(), text.find("\"band\"").unwrap(), text.find("\"provenance\"").unwrap());
    assert!(a < b && b < p);
}

#[test]
fn error_codes_and_exit_status() {
    let out = qckit().args(["generate", "--input", "{not json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_code(&out), "parse_error");

    let out = qckit().arg("transmogrify").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_code(&out), "usage");

    let out = qckit().args(["generate", "--input", "/nonexistent/spec.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_code(&out), "io");

    let out = qckit()
        .args(["generate", "--format", "csv", "--input", r#"{"kind":"lattice","alpha":1,"shift":0.5,"window":[-3,3]}"#])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = qckit()
        .args(["evaluate", "--function", "f", "--grid", "0:1:0.5@0", "--input", r#"{"points":[[0.0,1]],"window":[-1,1]}"#])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_code(&out), "zero_in_set");
}

#[test]
fn residual_gate_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_multiset(dir.path(), "h.json", r#"{"kind":"lattice","alpha":1,"shift":0.5,"window":[-2003,2003]}"#);
    let s = r#"{"atoms":[[-3,-1,0],[-2,1,0],[-1,-1,0],[0,1,0],[1,-1,0],[2,1,0],[3,-1,0]],"band":[-3,3],"provenance":"analytic"}"#;
    let report = dir.path().join("report.json");
    let out = qckit()
        .args(["verify", "identity", "--input", &a, "--spectrum", s, "--truncation", "2000", "--grid", "0:1:0.5@3", "--tolerance", "1e-13", "--output"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stderr_code(&out), "tolerance_exceeded");
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(written["report"]["residuals"]["max_identity_defect"].as_f64().unwrap() > 1e-13);
    // nothing but the report is left in the directory
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn decompose_csv_lists_phi() {
    let out = qckit()
        .args(["decompose", "--format", "csv", "--density", "1", "--input", r#"{"points":[[-1.75,1],[-0.75,1],[0.25,1],[1.25,1]],"window":[-2,2]}"#])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows, ["-2,0.25", "-1,0.25", "0,0.25", "1,0.25"]);
}
