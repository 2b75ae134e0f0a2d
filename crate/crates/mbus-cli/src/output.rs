use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::Config;
use crate::experiments::{ExperimentInfo, Outcome, Table};

pub fn write_csv(dir: &Path, table: &Table) -> std::io::Result<PathBuf> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(path)
}

/// Human-readable verdict: one line per check, then the warnings.
pub fn verdict_text(info: &ExperimentInfo, outcome: &Outcome, pass: bool, strict: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", if pass { "PASS" } else { "FAIL" }, info.id);
    for c in &outcome.checks {
        let tag = if c.criterion == 0 { "invariant".to_string() } else { format!("criterion {}", c.criterion) };
        let _ = writeln!(
            s,
            "{:<12} {}  {} = {:.6e} ({})",
            tag,
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    if outcome.warnings.is_empty() {
        let _ = writeln!(s, "warnings: none");
    } else {
        for w in &outcome.warnings {
            let _ = writeln!(s, "warning{}: {w}", if strict { " (strict)" } else { "" });
        }
    }
    s
}

pub struct ManifestInput<'a> {
    pub info: &'a ExperimentInfo,
    pub config: &'a Config,
    pub config_file: Option<&'a Path>,
    pub outcome: &'a Outcome,
    pub outputs: &'a [String],
    pub workers: Option<usize>,
    pub strict: bool,
    pub pass: bool,
    pub wall_time_s: f64,
}

pub fn manifest(m: &ManifestInput<'_>) -> serde_json::Value {
    json!({
        "experiment": m.info.id,
        "figure": m.info.figure,
        "description": m.info.description,
        "library_version": majorana_bus::VERSION,
        "cli_version": env!("CARGO_PKG_VERSION"),
        "defaults_version": m.config.u64("defaults_version").ok(),
        "seed": m.config.seed(),
        "workers": m.workers,
        "strict": m.strict,
        "config_file": m.config_file.map(|p| p.display().to_string()),
        "overrides": m.config.overrides(),
        "params": m.config.to_json(),
        "outputs": m.outputs,
        "summary": m.outcome.summary,
        "checks": m.outcome.checks,
        "warnings": m.outcome.warnings,
        "verdict": if m.pass { "PASS" } else { "FAIL" },
        "wall_time_s": m.wall_time_s,
        "rerun": format!("mbus --experiment {} --config manifest.json", m.info.id),
    })
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> std::io::Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}
