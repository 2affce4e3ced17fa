use std::process::{Command, Output};

use serde_json::Value;

fn uniwkb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uniwkb")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn solve_reports_documented_keys() {
    let out = uniwkb(&["solve", "--k", "2", "--l", "0", "--n", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["k", "l", "n", "s", "e_app", "q_minus", "q_plus", "t0", "phi", "e_prime_app", "d", "v", "e_ex", "delta_e"]
    );
    assert!((v["e_app"].as_f64().unwrap() - 3.000169).abs() < 1e-6);
    assert!((v["phi"].as_f64().unwrap() - 1.5707963).abs() < 1e-7);
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
}

#[test]
fn solve_linear_is_exact() {
    let v = json(&uniwkb(&["solve", "--k", "1", "--l", "0", "--n", "1"]));
    assert!((v["e_app"].as_f64().unwrap() - 4.08795).abs() < 1e-5);
    for key in ["d", "v", "delta_e"] {
        assert!(v[key].as_f64().unwrap().abs() < 1e-8, "{key}");
    }
}

#[test]
fn usage_errors_exit_64() {
    let out = uniwkb(&["solve", "--k", "0.5"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k must be ≥ 1"));
    assert_eq!(uniwkb(&["solve", "--k", "2", "--bogus"]).status.code(), Some(64));
    assert_eq!(uniwkb(&["wavefn", "--k", "2", "--grid", "3:1:10"]).status.code(), Some(64));
    assert_eq!(uniwkb(&["table1", "--only", "m=3"]).status.code(), Some(64));
    assert_eq!(uniwkb(&["--help"]).status.code(), Some(0));
}

#[test]
fn wavefn_ground_state_matches_oscillator() {
    let out = uniwkb(&["wavefn", "--k", "2", "--l", "0", "--n", "0", "--grid", "0.01:6:600"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["x", "psi_app", "dpsi_app", "h_psi", "psi_exact", "diff"]);
    assert_eq!(rows.len(), 600);
    let sup = column(&rows, 5).iter().fold(0.0_f64, |a, d| a.max(d.abs()));
    assert!(sup <= 0.05, "{sup}");
}

#[test]
fn wavefn_file_output_and_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.csv");
    let out = uniwkb(&["wavefn", "--k", "2", "--l", "2", "--n", "2", "--grid", "0.01:7:700", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = csv_rows(&std::fs::read_to_string(&path).unwrap());
    let psi = column(&rows, 1);
    let changes = psi.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    assert_eq!(changes, 2);
}

#[test]
fn wavefn_single_point() {
    let out = uniwkb(&["wavefn", "--k", "4", "--l", "1", "--n", "0", "--grid", "1.2:1.2:1"]);
    let (_, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "1.2");
}

#[test]
fn unwritable_output_fails() {
    let out = uniwkb(&["solve", "--k", "2", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_energies() {
    let e = |args: &[&str]| json(&uniwkb(args))["e_ex"].as_f64().unwrap();
    assert!((e(&["oracle", "--k", "4", "--l", "1", "--n", "2"]) - 26.3500).abs() < 1e-4);
    assert!((e(&["oracle", "--k", "2", "--l", "0", "--n", "2"]) - 11.0).abs() < 1e-8);
    assert!((e(&["oracle", "--k", "1", "--l", "0", "--n", "0"]) - 2.33811).abs() < 1e-5);
    let v = json(&uniwkb(&["oracle", "--k", "4", "--l", "0", "--n", "1"]));
    assert!(v["resolution_change"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn table1_filter_and_loose_mode() {
    let out = uniwkb(&["table1", "--only", "k=4", "--tol-table", "0.5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 9);
    assert!(rows.as_array().unwrap().iter().all(|r| r["k"] == 4.0 && r["pass"] == true));
}

#[test]
fn table1_full_run() {
    let out = uniwkb(&["table1", "--format", "json"]);
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 26);
    for r in rows.iter().filter(|r| r["k"] == 1.0 && r["l"] == 0) {
        for key in ["v", "d", "delta_e"] {
            assert!(r["computed"][key].as_f64().unwrap().abs() < 1e-8);
        }
    }
    let all_pass = rows.iter().all(|r| r["pass"] == true);
    assert_eq!(out.status.code(), Some(if all_pass { 0 } else { 1 }));
    // Deterministic given tolerances.
    let second = uniwkb(&["table1", "--format", "json"]);
    assert_eq!(second.status.code(), out.status.code());
    assert_eq!(second.stdout, out.stdout);
}
