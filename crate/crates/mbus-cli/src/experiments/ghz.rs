use majorana_bus::ghzgen::{
    analytic_evolution, b_coeff, collective_hamiltonian, default_cutoff, generate, generate_once, initial_state,
    rate_sweep, GhzMode, GhzParams, GhzResult, SweepRow,
};
use majorana_bus::openqs::Rates;
use majorana_bus::qcore::{propagate_state, state_fidelity, StepPolicy};

use super::bus::bus_coupling;
use super::{num, Check, ExperimentError, Outcome, Table};
use crate::config::{Config, ConfigError};

/// Smallest acceptable max F2 per register size.
fn f2_floor(n: usize) -> Option<f64> {
    match n {
        2 => Some(0.988),
        4 => Some(0.980),
        8 => Some(0.960),
        _ => None,
    }
}

fn parse_mode(s: &str) -> Result<GhzMode, ConfigError> {
    match s {
        "auto" => Ok(GhzMode::Auto),
        "full" => Ok(GhzMode::Full),
        "symmetric" => Ok(GhzMode::Symmetric),
        other => Err(ConfigError::Type { key: "ghz_mode".into(), expected: "auto, full or symmetric", found: other.into() }),
    }
}

fn ghz_params(cfg: &Config, n: usize) -> Result<GhzParams, ExperimentError> {
    let g = bus_coupling(cfg)?;
    let k = u32::try_from(cfg.u64("ghz_k")?).map_err(|_| ExperimentError::Failed("ghz_k too large".into()))?;
    let mut p = GhzParams::new(n, g, k);
    p.omega_rabi = cfg.f64("ghz_omega_over_nu") * p.nu;
    p.rates = Rates {
        kappa: cfg.f64("ghz_kappa_over_g") * g,
        gamma1: cfg.f64("ghz_gamma1_over_g") * g,
        gamma2: cfg.f64("ghz_gamma2_over_g") * g,
    };
    let nf = cfg.usize("ghz_n_fock")?;
    p.n_fock = if nf == 0 { default_cutoff(n, k) } else { nf };
    p.mode = parse_mode(cfg.str("ghz_mode"))?;
    p.samples = cfg.usize("ghz_samples")?;
    p.window = cfg.f64("ghz_window");
    p.validate()?;
    Ok(p)
}

fn trace_table(name: &str, r: &GhzResult) -> Table {
    let mut t = Table::new(name, &["t", "F2"]);
    for (time, f) in r.trace.times.iter().zip(&r.trace.fidelities) {
        t.push([num(*time), num(*f)]);
    }
    t
}

fn note_result(out: &mut Outcome, prefix: &str, p: &GhzParams, r: &GhzResult) {
    out.note(&format!("{prefix}_max_F2"), r.max_f2);
    out.note(&format!("{prefix}_t_at_max"), r.t_at_max);
    out.note(&format!("{prefix}_F2_at_Tk"), r.f2_at_tk);
    out.note(&format!("{prefix}_Tk"), r.t_k);
    out.note(&format!("{prefix}_mode"), r.mode);
    out.note(&format!("{prefix}_n_fock"), r.n_fock);
    out.note(&format!("{prefix}_n_fock_check"), r.n_fock_check);
    out.note(&format!("{prefix}_fock_delta"), r.fock_delta);
    out.note(&format!("{prefix}_converged"), r.converged);
    out.note(&format!("{prefix}_max_trace_drift"), r.stats.max_trace_drift);
    out.note(&format!("{prefix}_min_eigenvalue"), r.min_eigenvalue);
    out.note(&format!("{prefix}_nu_over_g"), p.nu / p.g);
    out.note(&format!("{prefix}_omega_over_g"), p.omega_rabi / p.g);
    out.note(&format!("{prefix}_epsilon"), p.epsilon());
    if !r.converged {
        out.warnings.push(format!(
            "N = {}: Fock cutoff not converged (delta {:?})",
            r.n_qubits, r.fock_delta
        ));
    }
    out.checks.push(Check::below(0, &format!("N = {} trace drift", r.n_qubits), r.stats.max_trace_drift, 1e-6));
    out.checks.push(Check::at_least(0, &format!("N = {} min eigenvalue", r.n_qubits), r.min_eigenvalue, -1e-6));
}

fn dissipative(out: &mut Outcome, p: &GhzParams, name: &str) -> Result<(), ExperimentError> {
    let r = generate(p)?;
    note_result(out, name, p, &r);
    if let Some(floor) = f2_floor(p.n_qubits) {
        out.checks.push(Check::at_least(11, &format!("max F2, N = {}", p.n_qubits), r.max_f2, floor));
    }
    out.tables.push(trace_table(&format!("{name}_trace"), &r));
    Ok(())
}

pub(super) fn ghz(cfg: &Config) -> Result<Outcome, ExperimentError> {
    let mut out = Outcome::default();
    let p2 = ghz_params(cfg, 2)?;

    // Closed-form propagator against direct integration, unitary, N = 2.
    let samples = cfg.usize("ghz_oracle_samples")?.max(1);
    let times: Vec<f64> = (1..=samples).map(|i| p2.t_k() * i as f64 / samples as f64).collect();
    let psi0 = initial_state(2, p2.n_fock);
    let policy = StepPolicy::default().with_frequency_bound(p2.nu);
    let direct = propagate_state(
        |t| collective_hamiltonian(t, &p2).expect("N = 2 within the dimension cap"),
        &psi0,
        0.0,
        &times,
        &policy,
    )
    .map_err(|e| ExperimentError::Failed(e.to_string()))?;
    let mut oracle = Table::new("ghz_oracle", &["t", "state_fidelity"]);
    let mut worst = 1.0_f64;
    for (t, psi) in times.iter().zip(&direct) {
        let phi = analytic_evolution(*t, &p2)?.apply(&psi0);
        let f = state_fidelity(&phi, psi);
        worst = worst.min(f);
        oracle.push([num(*t), num(f)]);
    }
    out.tables.push(oracle);
    out.note("oracle_min_fidelity", worst);
    out.checks.push(Check::above(10, "min oracle fidelity, N = 2", worst, 1.0 - 1e-6));

    let b = b_coeff(p2.t_k(), p2.g, p2.nu).norm();
    out.note("abs_B_at_Tk", b);
    out.checks.push(Check::below(10, "|B(T_k)|", b, 1e-12));

    for n in [2usize, 4] {
        let mut p = ghz_params(cfg, n)?.unitary();
        p.check_convergence = false;
        let r = generate_once(&p)?;
        out.note(&format!("unitary_N{n}_F2_at_Tk"), r.f2_at_tk);
        out.checks.push(Check::at_most(
            10,
            &format!("|1 - F2(T_k)|, unitary N = {n}"),
            (1.0 - r.f2_at_tk).abs(),
            1e-6,
        ));
    }

    dissipative(&mut out, &p2, "ghz_n2")?;
    Ok(out)
}

fn sweep_checks(out: &mut Outcome, rows: &[SweepRow], grid: &[f64], n: usize) {
    let at = |a: f64, b: f64| {
        rows.iter()
            .find(|r| r.gamma1_over_kappa == a && r.gamma2_over_kappa == b)
            .map(|r| r.max_f2)
            .expect("sweep covers the grid")
    };
    let mut monotone = true;
    for &x in grid {
        for w in grid.windows(2) {
            monotone &= at(w[1], x) <= at(w[0], x) && at(x, w[1]) <= at(x, w[0]);
        }
    }
    out.checks.push(Check::holds(11, &format!("sweep monotone in Gamma1, Gamma2 (N = {n})"), monotone));
    let base = grid[0];
    let mut margin = f64::INFINITY;
    for w in grid.windows(2) {
        let d1 = at(w[0], base) - at(w[1], base);
        let d2 = at(base, w[0]) - at(base, w[1]);
        margin = margin.min(d2 - d1);
    }
    out.note("gamma2_dominance_margin", margin);
    out.checks.push(Check::above(11, &format!("Gamma2 loss minus Gamma1 loss (N = {n})"), margin, 0.0));
}

pub(super) fn fig5(cfg: &Config, n: usize, grid_key: &str) -> Result<Outcome, ExperimentError> {
    let mut out = Outcome::default();
    let p = ghz_params(cfg, n)?;
    dissipative(&mut out, &p, &format!("fig5_n{n}"))?;

    let mut grid = cfg.f64_list(grid_key);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() < 2 {
        return Err(ExperimentError::Failed(format!("`{grid_key}` needs at least two rates")));
    }
    let rows = rate_sweep(&p, &grid, &grid)?;
    let mut t = Table::new(&format!("fig5_n{n}_sweep"), &["Gamma1_over_kappa", "Gamma2_over_kappa", "maxF2"]);
    for r in &rows {
        t.push([num(r.gamma1_over_kappa), num(r.gamma2_over_kappa), num(r.max_f2)]);
    }
    out.tables.push(t);
    sweep_checks(&mut out, &rows, &grid, n);
    Ok(out)
}
