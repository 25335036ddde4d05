use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn kinld(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinld"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn manifest(dir: &Path, sub: &str) -> Value {
    let text = fs::read_to_string(dir.join(format!("{sub}.manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn mu_single_point() {
    let dir = TempDir::new().unwrap();
    let o = kinld(dir.path(), &["mu", "--t", "4", "--x", "1", "--w", "0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&dir.path().join("mu.csv"));
    assert_eq!(r[0], ["t", "x", "mu", "branch", "heat"]);
    assert_eq!(r.len(), 2);
    let mu: f64 = r[1][2].parse().unwrap();
    assert!((mu - 1.5).abs() < 1e-14);
    assert_eq!(r[1][3], "power_law");
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&kinld(dir.path(), &["mu", "--x", "1:0:0"])), 1);
    assert_eq!(code(&kinld(dir.path(), &["mu", "--no-such-flag"])), 1);
    assert_eq!(code(&kinld(dir.path(), &["front", "--r", "-1"])), 1);
}

#[test]
fn help_exits_zero() {
    let dir = TempDir::new().unwrap();
    let o = kinld(dir.path(), &["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["mu", "phi", "scheme", "hopflax", "kinetic", "pdmp", "front"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn failed_hard_invariant_exits_two() {
    let dir = TempDir::new().unwrap();
    let o = kinld(dir.path(), &["mu", "--t", "1", "--x", "-2:2:9", "--brute", "--brute-n", "10", "--tol-brute", "1e-12"]);
    assert_eq!(code(&o), 2);
    let m = manifest(dir.path(), "mu");
    let failed = m["invariants"].as_array().unwrap().iter().any(|i| i["hard"] == true && i["passed"] == false);
    assert!(failed);
}

#[test]
fn pdmp_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["--seed", "7", "pdmp", "--n", "20000", "--dump", "500"];
    assert_eq!(code(&kinld(a.path(), &args)), 0);
    assert_eq!(code(&kinld(b.path(), &args)), 0);
    for f in ["pdmp_samples.csv", "pdmp_summary.json", "pdmp_rates.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = TempDir::new().unwrap();
    assert_eq!(code(&kinld(c.path(), &["--seed", "8", "pdmp", "--n", "20000", "--dump", "500"])), 0);
    assert_ne!(fs::read(a.path().join("pdmp_samples.csv")).unwrap(), fs::read(c.path().join("pdmp_samples.csv")).unwrap());
}

#[test]
fn front_exponent() {
    let dir = TempDir::new().unwrap();
    let o = kinld(dir.path(), &["front", "--t", "10:100", "--freidlin", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fit: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("front_fit.json")).unwrap()).unwrap();
    assert!((fit["exponent"].as_f64().unwrap() - 1.5).abs() < 1e-8);
    assert!((fit["prefactor"].as_f64().unwrap() - 0.272166).abs() < 1e-6);
    assert!(fit["note"].as_str().unwrap().contains("conjecture"));
    assert_eq!(rows(&dir.path().join("front.csv")).len(), 92);
    assert!(dir.path().join("freidlin.csv").exists());
}

#[test]
fn config_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "t = 4\nx = \"-1,1\"\nw = 0.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    assert_eq!(code(&kinld(dir.path(), &["--config", cfg, "mu"])), 0);
    let m = manifest(dir.path(), "mu");
    assert_eq!(m["config"]["t"], serde_json::json!([4.0]));
    assert_eq!(m["config"]["w"], 0.5);
    assert_eq!(m["config"]["brute_n"], 600);
    let first = m["config_sha256"].as_str().unwrap().to_owned();

    assert_eq!(code(&kinld(dir.path(), &["--config", cfg, "mu", "--w", "1"])), 0);
    let m = manifest(dir.path(), "mu");
    assert_eq!(m["config"]["w"], 1.0);
    assert_eq!(m["config"]["t"], serde_json::json!([4.0]));
    assert_ne!(m["config_sha256"].as_str().unwrap(), first);
}

#[test]
fn bad_config_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[nested]\nt = 1\n").unwrap();
    assert_eq!(code(&kinld(dir.path(), &["--config", cfg.to_str().unwrap(), "mu"])), 1);
}

#[test]
fn manifest_contents() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&kinld(dir.path(), &["phi", "--x", "-1:1:5", "--v", "-1:1:5"])), 0);
    let m = manifest(dir.path(), "phi");
    assert_eq!(m["tool"], "kinld");
    assert_eq!(m["subcommand"], "phi");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["versions"]["kinld"].is_string());
    assert!(m["versions"]["kinld-cli"].is_string());
    let outputs = m["outputs"].as_array().unwrap();
    assert!(outputs.iter().all(|o| !o["quantity"].as_str().unwrap().is_empty()));
    assert!(m["invariants"].as_array().unwrap().iter().all(|i| i["passed"] == true));
}

#[test]
fn scheme_and_hopflax() {
    let dir = TempDir::new().unwrap();
    let o = kinld(dir.path(), &["scheme", "--steps", "8", "--x-half", "4", "--dx", "0.1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = kinld(dir.path(), &["hopflax", "--t", "1", "--x", "-1:1:5", "--v", "-1:1:5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("hopflax_min.csv").exists());
}

#[test]
fn kinetic_compare_phi_table() {
    let dir = TempDir::new().unwrap();
    let o = kinld(
        dir.path(),
        &["kinetic", "--epsilon", "0.2,0.1", "--t", "0.5", "--nx", "201", "--nv", "101", "--compare-phi", "--window", "1.5", "--no-fields"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&dir.path().join("kinetic_table.csv"));
    assert_eq!(r[0], ["epsilon", "dt", "steps", "mass_drift", "sup_error", "constraint_gap"]);
    assert_eq!(r.len(), 3);
    for row in &r[1..] {
        let sup: f64 = row[4].parse().unwrap();
        assert!(sup.is_finite() && sup >= 0.0);
    }
}

#[test]
fn kinetic_bounded_periodic_passes_apriori() {
    let dir = TempDir::new().unwrap();
    let o = kinld(
        dir.path(),
        &["kinetic", "--datum", "bounded", "--boundary", "periodic", "--nx", "81", "--nv", "61", "--t", "0.5", "--no-fields"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(dir.path(), "kinetic");
    let names: Vec<&str> = m["invariants"].as_array().unwrap().iter().map(|i| i["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.starts_with("a priori")));
    assert!(names.iter().any(|n| n.starts_with("mass conservation")));
}
