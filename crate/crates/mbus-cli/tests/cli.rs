use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mbus_cli::{Config, ConfigError, EXPERIMENTS};

fn mbus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbus")).args(args).output().expect("mbus runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn list_shows_every_id_in_registry_order() {
    let out = mbus(&["--list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let ids: Vec<&str> = text.lines().skip(1).map(|l| l.split_whitespace().next().unwrap()).collect();
    let expected: Vec<&str> = EXPERIMENTS.iter().map(|e| e.id).collect();
    assert_eq!(ids, expected);
    assert_eq!(ids.len(), 12);
    let n8 = text.lines().find(|l| l.starts_with("fig5-n8")).unwrap();
    assert!(n8.contains("[long-running]"));
    assert!(!text.lines().find(|l| l.starts_with("fig2a")).unwrap().contains("[long-running]"));
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mbus(&["-e", "fig9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig9"));
}

#[test]
fn missing_experiment_is_a_usage_error() {
    assert_eq!(mbus(&[]).status.code(), Some(2));
}

#[test]
fn bad_overrides_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for set in ["no_such_key=1", "zeeman_mev=\"high\"", "include_e1=3", "malformed"] {
        let out = mbus(&["-e", "bus-params", "--out", d, "--set", set]);
        assert_eq!(out.status.code(), Some(2), "--set {set}");
    }
    assert_eq!(mbus(&["-e", "bus-params", "--out", d, "--workers", "0"]).status.code(), Some(2));
}

#[test]
fn bad_config_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[section]\nx = 1\n").unwrap();
    let out = mbus(&["-e", "bus-params", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn show_config_reflects_overrides() {
    let out = mbus(&["--show-config", "--set", "zeeman_mev=1.25", "--seed", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: toml::Table = text.parse().unwrap();
    assert_eq!(parsed["zeeman_mev"].as_float(), Some(1.25));
    assert_eq!(parsed["seed"].as_integer(), Some(7));
}

#[test]
fn precedence_is_defaults_then_file_then_set_then_seed() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.toml");
    fs::write(&file, "zeeman_mev = 1.4\nmu_mev = 0.9\nseed = 11\n").unwrap();
    let mut cfg = Config::defaults();
    assert_eq!(cfg.f64("zeeman_mev"), 1.5);
    cfg.merge_file(&file).unwrap();
    assert_eq!((cfg.f64("zeeman_mev"), cfg.f64("mu_mev"), cfg.seed()), (1.4, 0.9, 11));
    cfg.set("zeeman_mev=1.6").unwrap();
    cfg.set("seed=12").unwrap();
    assert_eq!((cfg.f64("zeeman_mev"), cfg.f64("mu_mev"), cfg.seed()), (1.6, 0.9, 12));

    let opts = mbus_cli::RunOptions {
        config: Some(file),
        sets: vec!["seed=12".into()],
        seed: Some(13),
        ..Default::default()
    };
    assert_eq!(mbus_cli::resolve_config(&opts).unwrap().seed(), 13);
}

#[test]
fn config_rejects_type_mismatches() {
    let mut cfg = Config::defaults();
    assert!(matches!(cfg.set("ghz_mode=3"), Err(ConfigError::Type { .. })));
    assert!(matches!(cfg.set("disorder_realizations=-4"), Err(ConfigError::Type { .. })));
    assert!(matches!(cfg.set("bogus=1"), Err(ConfigError::UnknownKey(_))));
    cfg.set("zeeman_mev=2").unwrap();
    assert_eq!(cfg.f64("zeeman_mev"), 2.0);
    cfg.set("ghz_mode=full").unwrap();
    assert_eq!(cfg.str("ghz_mode"), "full");
}

#[test]
fn run_writes_artifacts_and_reruns_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = mbus(&["-e", "fig2c", "--out", a.to_str().unwrap(), "--set", "lattice_nm=10.0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS fig2c"));
    for f in ["fig2c_edge_states.csv", "manifest.json", "verdict.txt"] {
        assert!(a.join(f).is_file(), "{f}");
    }
    let m = manifest(&a);
    assert_eq!(m["experiment"], "fig2c");
    assert_eq!(m["verdict"], "PASS");
    assert_eq!(m["overrides"][0], "lattice_nm=10.0");
    assert_eq!(m["params"]["wire_length_nm"], 3000.0);
    assert!(m["rerun"].as_str().unwrap().contains("--config manifest.json"));

    let out = mbus(&["-e", "fig2c", "--config", a.join("manifest.json").to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read(a.join("fig2c_edge_states.csv")).unwrap(),
        fs::read(b.join("fig2c_edge_states.csv")).unwrap()
    );
    assert_eq!(manifest(&b)["params"], m["params"]);
}

#[test]
fn failing_checks_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // Edge modes overlap strongly in a short wire.
    let out = mbus(&["-e", "fig2c", "--out", dir.path().to_str().unwrap(), "--set", "wire_length_nm=600"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(manifest(dir.path())["verdict"], "FAIL");
}

#[test]
fn csv_has_header_and_numeric_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = mbus(&["-e", "bus-params", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_path(dir.path().join("bus_params_beta.csv")).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["m", "beta_m", "J_m_E_M_over_m_omega"]);
    let rows: Vec<_> = r.records().map(|r| r.unwrap()).collect();
    assert!(!rows.is_empty());
    for row in rows {
        for cell in row.iter() {
            cell.parse::<f64>().unwrap();
        }
    }
}
