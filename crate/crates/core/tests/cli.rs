//! Command-line behaviour: exit codes, output formats, determinism and the
//! convergence studies.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cusplab::cli::commands::cmd_converge;
use cusplab::cli::config::{ConvergeMethod, RunConfig};

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn cusplab(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cusplab"));
    cmd.args(args).env_remove("CUSPLAB_THREADS");
    if let Some(p) = config {
        cmd.arg("--config").arg(p);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

const HYDROGEN: &str = "[system]\ncharge = 1.0\n\n[model]\nkind = \"hydrogenic\"\nn = 1\n";

#[test]
fn report_envelope_carries_metadata() {
    let out = cusplab(&["report", "--seed", "3"], Some(&config_path("hydrogen_ground.toml")));
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tool"], "cusplab");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["command"], "report");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(v["result"]["golden_ratios"], serde_json::json!([-1.0, 1.0, -1.0]));
}

#[test]
fn every_shipped_config_reports_cleanly() {
    for name in [
        "hydrogen_ground.toml",
        "hydrogen_2s.toml",
        "hydrogen_3s_z2.toml",
        "helium_product.toml",
        "helium_wrong_cusp.toml",
        "helium_hylleraas.toml",
        "lithium_product.toml",
    ] {
        let out = cusplab(&["report", "--format", "table"], Some(&config_path(name)));
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn wrong_energy_is_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(&dir, &HYDROGEN.replace("charge = 1.0", "charge = 1.0\nenergy = -0.3"));
    let out = cusplab(&["report", "--format", "table"], Some(&p));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("violated-beyond-error"));
}

#[test]
fn malformed_and_missing_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["[system\ncharge = 1", "[system]\ncharge = -1.0\n[model]\nkind = \"hydrogenic\"\nn = 1\n", "[system]\ncharge = 1.0\ncolour = 2\n"] {
        let p = write_config(&dir, text);
        let out = cusplab(&["report"], Some(&p));
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(!out.stderr.is_empty());
    }
    let out = cusplab(&["report"], Some(&dir.path().join("absent.toml")));
    assert_eq!(out.status.code(), Some(2));
    let out = cusplab(&["report", "--format", "yaml"], Some(&config_path("hydrogen_ground.toml")));
    assert_eq!(out.status.code(), Some(2));
    let out = cusplab(&["sphere-check", "--degree", "5"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.csv");
    let out = cusplab(
        &["report", "--format", "csv", "--out", target.to_str().unwrap()],
        Some(&config_path("hydrogen_2s.toml")),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap(), vec!["quantity", "r", "value", "error", "method", "flag"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert!(rows.iter().any(|r| &r[0] == "golden ratio 2" && r[2].parse::<f64>().unwrap() == 0.875));
}

#[test]
fn thread_count_does_not_change_output() {
    let p = config_path("helium_product.toml");
    let one = cusplab(&["report", "--threads", "1"], Some(&p));
    let two = cusplab(&["report", "--threads", "2"], Some(&p));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn sphere_and_jastrow_checks_pass() {
    let out = cusplab(&["sphere-check", "--trials", "20", "--format", "table"], None);
    assert_eq!(out.status.code(), Some(0));
    let out = cusplab(&["jastrow-check"], Some(&config_path("hydrogen_ground.toml")));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["result"]["apriori"]["fine"]["ratio"].as_f64().unwrap().is_finite());
}

#[test]
fn monte_carlo_error_falls_as_inverse_square_root() {
    let mut config = RunConfig::load(&config_path("helium_product.toml")).unwrap();
    config.converge.sample_counts = vec![100, 1_000, 10_000, 100_000, 1_000_000];
    for seed in [1, 2] {
        let study = cmd_converge(&config.clone().with_seed(Some(seed))).unwrap().result;
        let slope = study.fitted_order.unwrap();
        assert!((slope + 0.5).abs() <= 0.1, "seed {seed}: slope {slope}");
    }
}

#[test]
fn grid_refinement_converges_on_a_coulomb_integrand() {
    let mut config = RunConfig::load(&config_path("helium_product.toml")).unwrap();
    config.converge.method = ConvergeMethod::Grid;
    config.converge.point = [0.3, 0.0, 0.0];
    let study = cmd_converge(&config).unwrap().result;
    let errors: Vec<f64> = study.rows.iter().map(|r| r.error).collect();
    assert!(errors.len() >= 3);
    assert!(errors.last().unwrap() < &(1e-6 * errors[0]), "{errors:?}");
}
