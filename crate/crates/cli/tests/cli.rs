use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, config: &str, command: &str, seed: Option<u64>) -> (Output, PathBuf) {
    let cfg = dir.join(format!("{command}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orbitweave"));
    cmd.arg("--config").arg(&cfg).arg("--out").arg(&out).arg("--command").arg(command);
    if let Some(s) = seed {
        cmd.arg("--seed").arg(s.to_string());
    }
    (cmd.output().unwrap(), out)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Data rows of a CSV written by the tool, header comments and column
/// names dropped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const FULL2: &str = r#""system": {"kind": "full_shift", "k": 2}"#;

fn spectrum_config(lo: f64, hi: f64, grid: &str) -> String {
    format!(
        r#"{{ {FULL2}, "spectrum": {{ "observable": {{"frequency": 1}},
            "constraint": {{"lo": {lo}, "hi": {hi}, "lo_closed": false, "hi_closed": false}},
            "alpha_grid": {grid}, "count_n": 16 }} }}"#
    )
}

const GRID: &str = "[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]";

#[test]
fn spectrum_over_the_full_range() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), &spectrum_config(0.0, 1.0, GRID), "spectrum", None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert!(text.starts_with("# orbitweave 0.1.0 config_sha256="));
    assert!(text.contains("\r\n"));
    let r = rows(&out.join("spectrum.csv"));
    assert_eq!(r.len(), 10);
    let sup = r.last().unwrap();
    assert_eq!(sup[5], "sup");
    assert_eq!(sup[0], "0.5");
    assert_eq!(sup[1], "0.69314718056");
    for row in &r[..9] {
        assert_eq!(row[3], "16");
        assert!(!row[2].is_empty() && !row[4].is_empty());
    }
}

#[test]
fn open_constraint_flags_the_sup_row() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), &spectrum_config(0.25, 0.35, GRID), "spectrum", None);
    assert_eq!(code(&o), 0);
    let r = rows(&out.join("spectrum.csv"));
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][0], "0.3");
    assert_eq!(r[1][0], "0.35");
    assert_eq!(r[1][5], "sup_limit");
}

#[test]
fn grid_outside_range_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), &spectrum_config(0.0, 1.0, "[0.5, 1.5]"), "spectrum", None);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn malformed_config_and_missing_section_exit_2() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run(dir.path(), "{ not json", "katok", None);
    assert_eq!(code(&o), 2);
    let (o, _) = run(dir.path(), &format!("{{ {FULL2} }}"), "katok", None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing \"katok\""));
    let (o, _) = run(dir.path(), &format!("{{ {FULL2}, \"extra\": 1 }}"), "katok", None);
    assert_eq!(code(&o), 2);
}

#[test]
fn weave_bernoulli_target_with_defaults() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{ {FULL2}, "weave": {{ "target": {{"bernoulli": [0.3, 0.7]}} }} }}"#);
    let (o, out) = run(dir.path(), &cfg, "weave", Some(0));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let w = json(&out.join("weave.json"));
    assert!(w["result"]["final_distance"].as_f64().unwrap() <= 0.05);
    let s = json(&out.join("schedule.json"));
    let cert = s["result"]["certificate"].as_object().unwrap();
    assert!(cert.values().all(|v| v.as_bool() == Some(true)));
    let rle = fs::read_to_string(out.join("woven.rle")).unwrap();
    let total: u64 = rle
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_once(' ').unwrap().1.parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, w["result"]["total_length"].as_u64().unwrap());
    let conv = rows(&out.join("convergence.csv"));
    assert_eq!(conv.last().unwrap()[0], total.to_string());
}

#[test]
fn weave_point_mass_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{ {FULL2}, "weave": {{ "target": {{"P": [[1, 0], [1, 0]]}}, "t1": 16, "k_max": 2 }} }}"#);
    let (o, out) = run(dir.path(), &cfg, "weave", None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("weave.json"))["result"]["final_distance"].as_f64(), Some(0.0));
}

#[test]
fn weave_truncation_exits_3_with_report() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{ {FULL2}, "weave": {{ "target": {{"bernoulli": [0.5, 0.5]}}, "k_max": 40, "length_cap": 5000 }} }}"#
    );
    let (o, out) = run(dir.path(), &cfg, "weave", None);
    assert_eq!(code(&o), 3);
    let t = json(&out.join("truncation.json"));
    assert_eq!(t["result"]["cap"].as_u64(), Some(5000));
    assert!(!out.join("weave.json").exists());
}

#[test]
fn weave_missing_the_bound_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{ {FULL2}, "weave": {{ "target": {{"bernoulli": [0.3, 0.7]}}, "t1": 64, "k_max": 1, "bound": 0.0 }} }}"#
    );
    let (o, out) = run(dir.path(), &cfg, "weave", None);
    assert_eq!(code(&o), 1);
    assert!(out.join("weave.json").exists());
}

#[test]
fn shadow_shift_meets_the_splice_guarantee() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{ {FULL2}, "shadow": {{ "length": 200, "delta": 0.015625 }} }}"#);
    let (o, out) = run(dir.path(), &cfg, "shadow", Some(9));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("shadow.json"));
    assert!(s["result"]["shadow"]["max_deviation"].as_f64().unwrap() <= 2f64.powi(-7));
    assert_eq!(s["result"]["guarantee"].as_f64(), Some(2f64.powi(-7)));
}

#[test]
fn zero_delta_echoes_the_true_orbit() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{ {FULL2}, "shadow": {{ "length": 30, "delta": 0, "x0": {{"head": [1, 1, 0], "cycle": [0, 1]}} }} }}"#);
    let (o, out) = run(dir.path(), &cfg, "shadow", None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("shadow.json"));
    assert_eq!(s["result"]["shadow"]["max_deviation"].as_f64(), Some(0.0));
    assert_eq!(s["result"]["shadow"]["point"]["head"], serde_json::json!([1, 1, 0]));
}

#[test]
fn tent_modulus_table() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{ "system": {"kind": "tent", "s": 2.0},
        "shadow": { "mode": "modulus", "length": 40, "epsilon": 0.001, "trials": 20 } }"#;
    let (o, out) = run(dir.path(), cfg, "shadow", Some(2));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("modulus.csv")).unwrap();
    let hat: f64 = text.lines().nth(1).unwrap().split("delta_hat=").nth(1).unwrap().parse().unwrap();
    assert!(hat > 0.0);
    assert!(rows(&out.join("modulus.csv")).len() > 3);
}

#[test]
fn interval_cap_exits_4() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{ "system": {"kind": "tent", "s": 2.0},
        "shadow": { "length": 40, "delta": 0.5, "epsilon": 0.95, "cap": 1, "x0": 0.3 } }"#;
    let (o, out) = run(dir.path(), cfg, "shadow", Some(4));
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn katok_rates_and_reference() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{ {FULL2}, "katok": {{ "measure": {{"bernoulli": [0.5, 0.5]}}, "q": 1, "delta": 0.1, "n_grid": [8, 12, 16, 20] }} }}"#
    );
    let (o, out) = run(dir.path(), &cfg, "katok", None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("katok.csv")).unwrap();
    assert!(text.contains("# markov_entropy=0.69314718056"));
    let r = rows(&out.join("katok.csv"));
    assert_eq!(r[3][1], "1887437");
    let rate: f64 = r[3][2].parse().unwrap();
    assert!((rate - 2f64.ln()).abs() <= 0.05);
}

#[test]
fn katok_point_mass_rates_vanish() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{ {FULL2}, "katok": {{ "measure": {{"P": [[1, 0], [1, 0]]}}, "q": 1, "delta": 0.1, "n_grid": [4, 8] }} }}"#);
    let (o, out) = run(dir.path(), &cfg, "katok", None);
    assert_eq!(code(&o), 0);
    assert!(rows(&out.join("katok.csv")).iter().all(|r| r[2] == "0"));
}

#[test]
fn katok_infeasible_length_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{ {FULL2}, "katok": {{ "measure": {{"bernoulli": [0.5, 0.5]}}, "q": 2, "delta": 0.1, "n_grid": [28] }} }}"#);
    let (o, out) = run(dir.path(), &cfg, "katok", None);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn shrink_profile_is_monotone() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{ {FULL2}, "shrink": {{ "center": {{"bernoulli": [0.2, 0.8]}}, "delta_grid": [0.2, 0.1, 0.05], "budget": 200 }} }}"#
    );
    let (o, out) = run(dir.path(), &cfg, "shrink", Some(1));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let h: Vec<f64> = rows(&out.join("shrink.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(h.len(), 3);
    assert!(h.windows(2).all(|w| w[1] <= w[0]));
    assert!(h[2] >= 0.500402);
}

#[test]
fn identical_runs_are_byte_identical() {
    let cfg = format!(
        r#"{{ {FULL2}, "shrink": {{ "center": {{"bernoulli": [0.4, 0.6]}}, "delta_grid": [0.1, 0.02], "budget": 100 }} }}"#
    );
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let (_, oa) = run(a.path(), &cfg, "shrink", Some(5));
    let (_, ob) = run(b.path(), &cfg, "shrink", Some(5));
    for f in ["shrink.csv", "shrink.json"] {
        assert_eq!(fs::read(oa.join(f)).unwrap(), fs::read(ob.join(f)).unwrap());
    }
    let (_, oc) = run(b.path(), &cfg, "shrink", Some(6));
    assert_ne!(fs::read(oa.join("shrink.csv")).unwrap(), fs::read(oc.join("shrink.csv")).unwrap());
}
