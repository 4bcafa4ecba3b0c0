use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(kind: &str, scenario: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkd-audit"))
        .arg(kind)
        .arg("--scenario")
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn table1_csv_has_exact_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("table1", &scenarios().join("table1.scn"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "row,present_qkd_log10,requirement_log10,present_qkd,requirement");
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    let present: f64 = fields[1].parse().unwrap();
    let requirement: f64 = fields[2].parse().unwrap();
    assert!((present - -10.0 / 3.0).abs() < 1e-12);
    assert!((requirement - -10_000.0 * 2f64.log10()).abs() < 1e-9);
    let r = report(dir.path());
    assert_eq!(r["results"]["requirement"]["log2"], -10000.0);
}

#[test]
fn bb84_without_attack_reports_ideal_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("bb84", &scenarios().join("bb84_none.scn"), dir.path(), &[]);
    assert!(out.status.success());
    let r = report(dir.path());
    assert_eq!(r["results"]["trace_distance"]["linear"], 0.0);
    assert_eq!(r["results"]["guessing_probability"]["linear"], 1.0 / 16.0);
    assert_eq!(r["results"]["guessing_probability"]["log2"], -4.0);
    assert_eq!(r["config"]["attack"], "none");
    assert_eq!(r["results"]["abort"], false);
}

#[test]
fn missing_key_is_a_schema_violation() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "bad.scn", "raw_bits = 12\npa_seed = 0\nattack = none\n");
    let out = run("bb84", &scenario, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("key_bits"));
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn unknown_key_and_wrong_kind_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "extra.scn", "eps = 0.1\nkey_bits = 8\nflux = 3\n");
    let out = run("table1", &scenario, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flux"));

    let scenario = write(dir.path(), "kind.scn", "kind = bb84\neps = 0.1\nkey_bits = 8\n");
    assert_eq!(run("table1", &scenario, dir.path(), &[]).status.code(), Some(2));

    let scenario = write(dir.path(), "value.scn", "eps = 2.0\nkey_bits = 8\n");
    assert_eq!(run("bounds", &scenario, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("bounds", &dir.path().join("nope.scn"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
}

#[test]
fn numerical_caps_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("bb84", &scenarios().join("bb84_too_large.scn"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    let scenario = write(dir.path(), "big.scn", "model = random_cq\nkey_bits = 8\neve_dim = 32\n");
    assert_eq!(run("metrics", &scenario, dir.path(), &[]).status.code(), Some(3));
}

#[test]
fn seed_override_is_recorded_and_changes_the_instance() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("metrics_cq.scn");
    assert!(run("metrics", &scenario, &dir.path().join("a"), &[]).status.success());
    assert!(run("metrics", &scenario, &dir.path().join("b"), &["--seed", "99"]).status.success());
    let (a, b) = (report(&dir.path().join("a")), report(&dir.path().join("b")));
    assert_eq!(a["config"]["rng_seed"], 12);
    assert_eq!(b["config"]["rng_seed"], 99);
    assert_ne!(a["results"]["holevo_chi"], b["results"]["holevo_chi"]);
    assert_eq!(b["results"]["holevo_bound_ideal"]["holds"], true);
}

#[test]
fn every_example_scenario_runs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut ran = 0;
    for entry in std::fs::read_dir(scenarios()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        if name == "bb84_too_large" {
            continue;
        }
        let kind = name.split('_').next().unwrap();
        let (first, second) = (dir.path().join(format!("{name}-1")), dir.path().join(format!("{name}-2")));
        for out in [&first, &second] {
            let o = run(kind, &path, out, &[]);
            assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let bytes = |p: &Path| std::fs::read(p.join("report.json")).unwrap();
        assert_eq!(bytes(&first), bytes(&second), "{name}");
        let r = report(&first);
        assert_eq!(r["scenario"], kind);
        assert!(r["config"].as_object().is_some_and(|c| !c.is_empty()), "{name} has no resolved config");
        ran += 1;
    }
    assert!(ran >= 10);
}
