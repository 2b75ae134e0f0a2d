//! Experiment runner behind the `mbus` binary.
//!
//! Each experiment reads the flat configuration in `defaults.toml` (merged
//! with an optional file and `key=value` overrides), writes CSV tables, a
//! `manifest.json` and a `verdict.txt`, and reports PASS/FAIL against its
//! acceptance thresholds.

pub mod config;
pub mod experiments;
pub mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{Config, ConfigError};
pub use experiments::{find, run_experiment, Check, ExperimentError, ExperimentInfo, Outcome, Table, EXPERIMENTS};

/// Exit status of a run.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub experiment: String,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub sets: Vec<String>,
    pub strict: bool,
}

#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Experiment(ExperimentError),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Experiment(ExperimentError::Unknown(_) | ExperimentError::Config(_)) => EXIT_USAGE,
            _ => EXIT_FAIL,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "{m}"),
            Self::Experiment(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "cannot write outputs: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        Self::Experiment(ExperimentError::Config(e))
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// Defaults, then `--config`, then `--set`, then `--seed`.
pub fn resolve_config(opts: &RunOptions) -> Result<Config, ConfigError> {
    let mut cfg = Config::defaults();
    if let Some(path) = &opts.config {
        cfg.merge_file(path)?;
    }
    for s in &opts.sets {
        cfg.set(s)?;
    }
    if let Some(seed) = opts.seed {
        cfg.set(&format!("seed={seed}"))?;
    }
    Ok(cfg)
}

#[derive(Debug)]
pub struct RunReport {
    pub info: &'static ExperimentInfo,
    pub outcome: Outcome,
    pub pass: bool,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

/// Runs one experiment on a pool of `workers` threads (all cores if unset).
pub fn execute(id: &str, cfg: &Config, workers: Option<usize>) -> Result<Outcome, ExperimentError> {
    if find(id).is_none() {
        return Err(ExperimentError::Unknown(id.to_string()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| ExperimentError::Failed(e.to_string()))?;
    pool.install(|| run_experiment(id, cfg))
}

/// Resolves the configuration, runs the experiment and writes every artifact.
pub fn run(opts: &RunOptions) -> Result<RunReport, RunError> {
    let info = find(&opts.experiment).ok_or_else(|| RunError::Experiment(ExperimentError::Unknown(opts.experiment.clone())))?;
    if opts.workers == Some(0) {
        return Err(RunError::Usage("--workers must be at least 1".into()));
    }
    let cfg = resolve_config(opts)?;
    let out_dir = opts
        .out
        .clone()
        .unwrap_or_else(|| Path::new("results").join(info.id));
    std::fs::create_dir_all(&out_dir)?;

    let start = Instant::now();
    let outcome = execute(info.id, &cfg, opts.workers).map_err(RunError::Experiment)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let pass = outcome.passed() && !(opts.strict && !outcome.warnings.is_empty());

    let mut files = Vec::new();
    for t in &outcome.tables {
        files.push(output::write_csv(&out_dir, t)?);
    }
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = output::manifest(&output::ManifestInput {
        info,
        config: &cfg,
        config_file: opts.config.as_deref(),
        outcome: &outcome,
        outputs: &names,
        workers: opts.workers,
        strict: opts.strict,
        pass,
        wall_time_s,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    files.push(output::write_text(&out_dir, "manifest.json", &(text + "\n"))?);
    files.push(output::write_text(
        &out_dir,
        "verdict.txt",
        &output::verdict_text(info, &outcome, pass, opts.strict),
    )?);
    Ok(RunReport { info, outcome, pass, out_dir, files, wall_time_s })
}

/// The `--list` table, in registry order.
pub fn list_experiments() -> String {
    let mut s = format!("{:<14} {:<15} {:<10} {}\n", "id", "figure", "runtime", "description");
    for e in &EXPERIMENTS {
        let flag = if e.long_running { " [long-running]" } else { "" };
        s.push_str(&format!("{:<14} {:<15} {:<10} {}{}\n", e.id, e.figure, e.runtime, e.description, flag));
    }
    s
}
