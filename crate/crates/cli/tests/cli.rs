use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn prmi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prmi")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn text_field(o: &Output, key: &str) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_owned))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(o)))
}

fn write_state(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn sweep(state: &Path, extra: &[&str]) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let mut args = vec!["sweep", "--state", state.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = prmi(&args);
    assert!(o.status.success(), "stderr: {}", stderr(&o));
    (dir, out)
}

fn cell(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn pure_file_gives_twice_the_entropy_at_one() {
    let p = fixture("pure.json");
    for which in ["uu", "ud", "dd"] {
        let o = prmi(&["compute", "--state", p.to_str().unwrap(), "--alpha", "1", "--which", which, "--json"]);
        let v = json(&o)["value"].as_f64().unwrap();
        assert!((v - 1.000805).abs() < 1e-6, "{which}: {v}");
    }
}

#[test]
fn pmf_file_is_copy_cc() {
    let p = fixture("copy_cc.json");
    let o = prmi(&["compute", "--state", p.to_str().unwrap(), "--alpha", "0.25", "--json"]);
    let v = json(&o);
    // α/(1−α) · H_∞ of (0.2, 0.8).
    assert!((v["value"].as_f64().unwrap() - (-(0.8f64).ln() / 3.0)).abs() < 1e-12);
    assert_eq!(v["route"], "closed-form");
}

#[test]
fn trace_violation_exits_with_four() {
    let o = prmi(&["compute", "--state", fixture("bad_trace.json").to_str().unwrap(), "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("trace"));
}

#[test]
fn missing_file_exits_with_two() {
    let o = prmi(&["compute", "--state", "/nonexistent/state.json", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn schema_violation_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (serde_json::json!({"dA": 2, "dB": 2, "matrix": [[1, 0]]}), "$.matrix"),
        (serde_json::json!({"pmf": [[0.5, "a"]]}), "$.pmf[0][1]"),
        (serde_json::json!({"amplitudes": [[1, 0]], "dA": 1}), "$.dB"),
    ];
    for (k, (v, path)) in cases.iter().enumerate() {
        let p = write_state(dir.path(), &format!("s{k}.json"), v);
        let o = prmi(&["compute", "--state", p.to_str().unwrap(), "--alpha", "1"]);
        assert_eq!(o.status.code(), Some(3), "{v}");
        assert!(stderr(&o).contains(path), "{} lacks {path}", stderr(&o));
    }
    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{not json").unwrap();
    assert_eq!(prmi(&["compute", "--state", p.to_str().unwrap(), "--alpha", "1"]).status.code(), Some(3));
}

#[test]
fn pure_sweep_orders_the_three_curves() {
    let (_dir, out) = sweep(&fixture("pure.json"), &[]);
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["alpha", "rmi0", "rmi1", "rmi2", "certified"]);
    assert_eq!(rows.len(), 26);
    for r in &rows {
        let (a, r0, r1, r2) = (cell(&r[0]), cell(&r[1]), cell(&r[2]), cell(&r[3]));
        if a == 1.0 {
            assert!((r0 - r1).abs() < 1e-10 && (r1 - r2).abs() < 1e-10);
        } else {
            assert!(r0 > r1 + 1e-6 && r1 > r2 + 1e-6, "α={a}: {r0} {r1} {r2}");
        }
    }
}

#[test]
fn copy_cc_sweep_agrees_at_one() {
    let (_dir, out) = sweep(&fixture("copy_cc.json"), &[]);
    let (_, rows) = read_csv(&out);
    let r = rows.iter().find(|r| r[0] == "1").unwrap();
    let v: Vec<f64> = r[1..4].iter().map(|x| cell(x)).collect();
    assert!((v[0] - v[2]).abs() < 1e-8 && (v[1] - v[2]).abs() < 1e-8);
}

#[test]
fn product_sweep_is_zero() {
    let (_dir, out) = sweep(&fixture("product.json"), &[]);
    let (_, rows) = read_csv(&out);
    for r in &rows {
        for x in &r[1..4] {
            assert!(cell(x).abs() < 1e-10, "{r:?}");
        }
    }
}

#[test]
fn sweep_then_compute_round_trips() {
    let state = fixture("pure.json");
    let flags = ["--tol", "1e-11", "--seed", "3"];
    let (_dir, out) = sweep(&state, &[&flags[..], &["--alpha-min", "0.35", "--alpha-max", "1.65", "--steps", "13"]].concat());
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), 14);
    for r in &rows {
        for (col, which) in [(1, "uu"), (2, "ud"), (3, "dd")] {
            let mut args = vec!["compute", "--state", state.to_str().unwrap(), "--alpha", &r[0], "--which", which];
            args.extend_from_slice(&flags);
            let o = prmi(&args);
            assert!(o.status.success());
            assert_eq!(text_field(&o, "value"), r[col], "α={} {which}", r[0]);
        }
    }
}

#[test]
fn unsupported_points_are_nan() {
    let dir = tempfile::tempdir().unwrap();
    // (1/2)|ψ⟩⟨ψ| + I/16 on 4 ⊗ 2 with |ψ⟩ = (|00⟩ + |11⟩ + |21⟩)/√3.
    let n = 8;
    let psi = [0usize, 3, 5];
    let mut m = vec![vec![0.0f64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += 1.0 / 16.0;
    }
    for &i in &psi {
        for &j in &psi {
            m[i][j] += 0.5 / 3.0;
        }
    }
    let flat: Vec<Value> = m.iter().flatten().map(|&x| serde_json::json!([x, 0.0])).collect();
    let p = write_state(dir.path(), "big.json", &serde_json::json!({"dA": 4, "dB": 2, "matrix": flat}));
    let (_d, out) = sweep(&p, &["--alpha-min", "0.2", "--alpha-max", "0.8", "--steps", "2"]);
    let (_, rows) = read_csv(&out);
    assert_eq!(rows[0][3], "nan");
    assert_eq!(rows[0][4], "0");
    assert_eq!(rows[1][3], "nan");
    assert!(cell(&rows[2][3]).is_finite());
    assert!(cell(&rows[0][1]).is_finite());
}

#[test]
fn strict_flags_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_state(
        dir.path(),
        "mixed.json",
        &serde_json::json!({"dA": 2, "dB": 2, "matrix": [
            [0.4, 0], [0.1, 0.05], [0, 0], [0.15, 0],
            [0.1, -0.05], [0.2, 0], [0, 0], [0, 0],
            [0, 0], [0, 0], [0.1, 0], [0, 0],
            [0.15, 0], [0, 0], [0, 0], [0.3, 0]
        ]}),
    );
    let s = p.to_str().unwrap();
    let loose = prmi(&["compute", "--state", s, "--alpha", "0.75", "--max-iter", "1", "--json"]);
    assert!(loose.status.success());
    assert_eq!(json(&loose)["converged"], false);
    let strict = prmi(&["compute", "--state", s, "--alpha", "0.75", "--max-iter", "1", "--strict"]);
    assert_eq!(strict.status.code(), Some(5));
    let ok = prmi(&["compute", "--state", s, "--alpha", "0.75", "--strict"]);
    assert!(ok.status.success());
}

#[test]
fn exponent_report() {
    let p = fixture("copy_cc.json");
    let above = json(&prmi(&["exponent", "--state", p.to_str().unwrap(), "--rate", "0.6", "--json"]));
    assert_eq!(above["exponent"].as_f64(), Some(0.0));
    let v = json(&prmi(&["exponent", "--state", p.to_str().unwrap(), "--rate", "0.3", "--curve", "--json"]));
    assert!(v["exponent"].as_f64().unwrap() > 0.0);
    assert_eq!(v["in_scope"], true);
    assert_eq!(v["curve"].as_array().unwrap().len(), 10);
}

#[test]
fn simulate_report() {
    let p = fixture("copy_cc.json");
    let v = json(&prmi(&["simulate", "--state", p.to_str().unwrap(), "--rate", "0.3", "--n-max", "2", "--json"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for (k, r) in rows.iter().enumerate() {
        let bound = (-0.3 * (k + 1) as f64).exp();
        assert!((r["type_two_bound"].as_f64().unwrap() - bound).abs() < 1e-10);
    }
    let too_many = prmi(&["simulate", "--state", p.to_str().unwrap(), "--rate", "0.3", "--n-max", "9"]);
    assert_eq!(too_many.status.code(), Some(1));
}

#[test]
fn oracle_matches_solver() {
    let p = fixture("pure.json");
    let s = p.to_str().unwrap();
    let oracle = json(&prmi(&["oracle", "--state", s, "--alpha", "0.75", "--resolution", "12", "--json"]));
    let solver = json(&prmi(&["compute", "--state", s, "--alpha", "0.75", "--json"]));
    let (o, v) = (oracle["value"].as_f64().unwrap(), solver["value"].as_f64().unwrap());
    assert!(o >= v - 1e-9 && o - v < 2e-3);
}

#[test]
fn bad_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = prmi(&[
        "sweep", "--state", fixture("pure.json").to_str().unwrap(), "--alpha-max", "3", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}
