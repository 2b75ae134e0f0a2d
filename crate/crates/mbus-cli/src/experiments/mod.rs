//! The twelve reproducible experiments and their acceptance checks.

mod bus;
mod ghz;
mod transfer;
mod wire;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Config, ConfigError};

/// Static description of one experiment.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExperimentInfo {
    pub id: &'static str,
    pub figure: &'static str,
    pub description: &'static str,
    pub runtime: &'static str,
    pub long_running: bool,
}

const fn info(id: &'static str, figure: &'static str, description: &'static str, runtime: &'static str) -> ExperimentInfo {
    ExperimentInfo { id, figure, description, runtime, long_running: false }
}

pub const EXPERIMENTS: [ExperimentInfo; 12] = [
    info("fig2a", "Fig. 2(a)", "eps1, eps2 versus Zeeman splitting at L = 3 um", "~2 s"),
    info("fig2b", "Fig. 2(b)", "eps1 versus wire length and exp(-L/2xi) envelope fit", "~5 s"),
    info("fig2c", "Fig. 2(c)", "left/right edge-state densities at L and L + one period", "~2 s"),
    info("fig3-mu", "Fig. 3(a,c)", "chemical-potential disorder ensembles: <eps1>, sigma, overlaps", "~15 s"),
    info("fig3-phase", "Fig. 3(b,d)", "pairing-phase disorder ensembles: <eps1>, sigma, overlaps", "~15 s"),
    info("perturb-check", "perturbation", "first/second-order splitting versus exact diagonalization", "~2 s"),
    info("bus-params", "bus params", "effective Jaynes-Cummings parameters and sideband amplitudes", "< 1 s"),
    info("rwa-check", "Fig. 4 inset", "lab-frame, JC and JC+AJC transfer traces at omega_tq = 33 g", "~15 s"),
    info("fig4", "Fig. 4", "transfer fidelity trace and maximum fidelity versus temperature", "< 1 s"),
    info("ghz", "GHZ protocol", "GHZ oracle checks and dissipative N = 2 generation", "~5 s"),
    info("fig5-n4", "Fig. 5(a)", "N = 4 GHZ fidelity and (Gamma1, Gamma2) sweep", "~30 s"),
    ExperimentInfo {
        long_running: true,
        ..info("fig5-n8", "Fig. 5(b)", "N = 8 GHZ fidelity and (Gamma1, Gamma2) sweep (symmetric subspace)", "~15 min")
    },
];

pub fn find(id: &str) -> Option<&'static ExperimentInfo> {
    EXPERIMENTS.iter().find(|e| e.id == id)
}

/// One CSV artifact.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        let row: Vec<String> = row.into_iter().collect();
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }
}

/// Shortest round-trip formatting, so reruns produce identical bytes.
pub fn num(x: f64) -> String {
    format!("{x}")
}

fn bound(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e4) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// One acceptance check, tagged with the criterion it belongs to (0 for module invariants).
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(criterion: u8, name: &str, value: f64, limit: f64) -> Self {
        Self { criterion, name: name.into(), value, bound: format!("<= {}", bound(limit)), pass: value <= limit }
    }

    pub fn below(criterion: u8, name: &str, value: f64, limit: f64) -> Self {
        Self { criterion, name: name.into(), value, bound: format!("< {}", bound(limit)), pass: value < limit }
    }

    pub fn at_least(criterion: u8, name: &str, value: f64, limit: f64) -> Self {
        Self { criterion, name: name.into(), value, bound: format!(">= {}", bound(limit)), pass: value >= limit }
    }

    pub fn above(criterion: u8, name: &str, value: f64, limit: f64) -> Self {
        Self { criterion, name: name.into(), value, bound: format!("> {}", bound(limit)), pass: value > limit }
    }

    pub fn within(criterion: u8, name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            value,
            bound: format!("in [{}, {}]", bound(lo), bound(hi)),
            pass: (lo..=hi).contains(&value),
        }
    }

    pub fn holds(criterion: u8, name: &str, ok: bool) -> Self {
        Self {
            criterion,
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: "holds".into(),
            pass: ok,
        }
    }
}

/// Everything an experiment produces.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
    /// Convergence or numerical warnings; fatal under `--strict`.
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn note<T: Serialize>(&mut self, key: &str, value: T) {
        self.summary.insert(key.into(), serde_json::to_value(value).expect("summary value serializes"));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug)]
pub enum ExperimentError {
    Unknown(String),
    Config(ConfigError),
    Failed(String),
}

impl std::fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Unknown(id) => write!(f, "unknown experiment `{id}` (see --list)"),
            Self::Config(e) => write!(f, "{e}"),
            Self::Failed(m) => write!(f, "experiment failed: {m}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<ConfigError> for ExperimentError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

macro_rules! failed_from {
    ($($t:ty),*) => {$(
        impl From<$t> for ExperimentError {
            fn from(e: $t) -> Self {
                Self::Failed(e.to_string())
            }
        }
    )*};
}

failed_from!(
    majorana_bus::nanowire::NanowireError,
    majorana_bus::perturb::PerturbError,
    majorana_bus::drivebus::DriveError,
    majorana_bus::openqs::OpenQsError,
    majorana_bus::ghzgen::GhzError
);

pub fn run_experiment(id: &str, cfg: &Config) -> Result<Outcome, ExperimentError> {
    match id {
        "fig2a" => wire::fig2a(cfg),
        "fig2b" => wire::fig2b(cfg),
        "fig2c" => wire::fig2c(cfg),
        "fig3-mu" => wire::fig3(cfg, majorana_bus::nanowire::DisorderKind::ChemicalPotential),
        "fig3-phase" => wire::fig3(cfg, majorana_bus::nanowire::DisorderKind::PairingPhase),
        "perturb-check" => wire::perturb_check(cfg),
        "bus-params" => bus::bus_params(cfg),
        "rwa-check" => bus::rwa_check(cfg),
        "fig4" => transfer::fig4(cfg),
        "ghz" => ghz::ghz(cfg),
        "fig5-n4" => ghz::fig5(cfg, 4, "sweep_grid_n4"),
        "fig5-n8" => ghz::fig5(cfg, 8, "sweep_grid_n8"),
        other => Err(ExperimentError::Unknown(other.to_string())),
    }
}
