use std::f64::consts::PI;

use majorana_bus::openqs::{thermal_scan, transfer_experiment, transfer_once, Rates, TransferConfig};
use majorana_bus::units::{bose_occupation, ghz_to_rad_per_ns};

use super::bus::bus_coupling;
use super::{num, Check, ExperimentError, Outcome, Table};
use crate::config::Config;

pub(super) fn fig4(cfg: &Config) -> Result<Outcome, ExperimentError> {
    let g = bus_coupling(cfg)?;
    let rates = Rates {
        kappa: cfg.f64("kappa_over_g") * g,
        gamma1: cfg.f64("gamma1_over_g") * g,
        gamma2: cfg.f64("gamma2_over_g") * g,
    };
    let n_fock = cfg.usize("transfer_n_fock")?;
    let mut tc = TransferConfig::operating_point(g);
    tc.rates = rates;
    tc.n_fock = n_fock;
    tc.samples = cfg.usize("transfer_samples")?;
    let r = transfer_experiment(&tc)?;
    let unitary = transfer_once(&TransferConfig { rates: Rates::default(), ..tc.clone() })?;

    let omega_c = ghz_to_rad_per_ns(cfg.f64("omega_c_ghz"));
    let temps_mk = cfg.f64_list("thermal_temperatures_mk");
    let temps_k: Vec<f64> = temps_mk.iter().map(|t| t * 1e-3).collect();
    let rows = thermal_scan(g, rates, &temps_k, omega_c, n_fock)?;

    let mut tt = Table::new("fig4_transfer", &["t", "F1_joint", "F1_reduced"]);
    for (i, &t) in r.joint.times.iter().enumerate() {
        tt.push([num(t), num(r.joint.fidelities[i]), num(r.reduced.fidelities[i])]);
    }
    let mut th = Table::new("fig4_thermal", &["T_mK", "n_c", "maxF1", "maxF1_reduced"]);
    for row in &rows {
        th.push([num(row.t_mk), num(row.n_c), num(row.max_f1), num(row.max_f1_reduced)]);
    }

    let limit = cfg.f64("thermal_limit_mk");
    let cold: Vec<_> = rows.iter().filter(|row| row.t_mk <= limit).collect();
    let worst = cold.iter().map(|row| row.infidelity).fold(0.0, f64::max);
    let worst_reduced = cold.iter().map(|row| 1.0 - row.max_f1_reduced).fold(0.0, f64::max);
    let n_c_20 = bose_occupation(omega_c, 0.020);
    let fock_delta = r.fock_delta.unwrap_or(f64::NAN);

    let mut out = Outcome::default();
    out.note("g", g);
    out.note("rates", rates);
    out.note("transfer_time", r.transfer_time);
    out.note("gt_over_pi_at_transfer", g * r.transfer_time / PI);
    out.note("F1_joint_at_transfer", r.f1_joint_at_transfer);
    out.note("F1_reduced_at_transfer", r.f1_reduced_at_transfer);
    out.note("F1_unitary_at_transfer", unitary.f1_joint_at_transfer);
    out.note("fock_delta", fock_delta);
    out.note("max_trace_drift", r.stats.max_trace_drift);
    out.note("min_eigenvalue", r.min_eigenvalue);
    out.note("n_c_20mK", n_c_20);
    out.note("max_infidelity_joint_cold", worst);
    out.note("max_infidelity_reduced_cold", worst_reduced);
    if !(fock_delta < 1e-6) {
        out.warnings.push(format!("Fock doubling changed F1 by {fock_delta:.3e}"));
    }
    out.checks.push(Check::at_least(8, "F1_joint(gt/pi = 1/2), rates g/1000", r.f1_joint_at_transfer, 0.998));
    out.checks.push(Check::at_most(
        8,
        "|1 - F1(gt/pi = 1/2)|, unitary",
        (1.0 - unitary.f1_joint_at_transfer).abs(),
        1e-6,
    ));
    if cold.is_empty() {
        out.checks.push(Check::holds(9, "temperature grid reaches T <= limit", false));
    } else {
        out.checks.push(Check::at_most(9, &format!("max joint infidelity for T <= {limit} mK"), worst, 2e-3));
    }
    out.checks.push(Check::within(9, "n_c(20 mK)", n_c_20, 2e-6, 6e-6));
    out.checks.push(Check::below(0, "trace drift", r.stats.max_trace_drift, 1e-7));
    out.checks.push(Check::at_least(0, "min eigenvalue", r.min_eigenvalue, -1e-7));
    out.tables.push(tt);
    out.tables.push(th);
    Ok(out)
}
