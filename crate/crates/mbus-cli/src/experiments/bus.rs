use majorana_bus::drivebus::{
    bessel_j, effective_params, neglect_condition, summarize, theta_star, validate_rwa, JunctionDriveParams,
};
use majorana_bus::units::{ghz_to_rad_per_ns, rad_per_ns_to_mhz};

use super::{num, Check, ExperimentError, Outcome, Table};
use crate::config::Config;

pub(super) fn drive_params(cfg: &Config) -> Result<JunctionDriveParams, ExperimentError> {
    let e_m = ghz_to_rad_per_ns(cfg.f64("e_m_ghz"));
    let omega = cfg.f64("omega_over_e_m") * e_m;
    let omega_c = ghz_to_rad_per_ns(cfg.f64("omega_c_ghz"));
    let e2 = ghz_to_rad_per_ns(cfg.f64("e2_ghz"));
    let p = JunctionDriveParams {
        e1: 0.01 * e2,
        e2,
        e_m,
        lambda_g: cfg.f64("theta_over_theta_star") * theta_star() * omega,
        lambda_c: cfg.f64("lambda_c_over_omega_c") * omega_c,
        omega,
        omega_c,
        phi0: cfg.f64("phi0_rad"),
        n_fock: cfg.usize("bus_n_fock")?,
        include_e1: cfg.bool("include_e1"),
    };
    p.validate()?;
    Ok(p)
}

/// JC coupling g (rad/ns) at the configured operating point.
pub(super) fn bus_coupling(cfg: &Config) -> Result<f64, ExperimentError> {
    let g = effective_params(&drive_params(cfg)?)?.g.abs();
    if g == 0.0 {
        return Err(ExperimentError::Failed("operating point gives g = 0".into()));
    }
    Ok(g)
}

pub(super) fn bus_params(cfg: &Config) -> Result<Outcome, ExperimentError> {
    let p = drive_params(cfg)?;
    let eff = effective_params(&p)?;
    let nc = neglect_condition(&p)?;
    let summary = summarize(&p)?;

    let mut t = Table::new("bus_params_beta", &["m", "beta_m", "J_m_E_M_over_m_omega"]);
    for (m, (b, s)) in nc.beta.iter().zip(&nc.smallness).enumerate() {
        t.push([(m + 1).to_string(), num(*b), num(*s)]);
    }
    // The Method also bounds β_1 at θ = 0.4, away from θ*.
    let beta1_at_04 = p.e_m * bessel_j(1, 0.4)? / p.omega;

    let mut out = Outcome::default();
    out.note("derived", &summary);
    out.note("effective", eff);
    out.note("beta1_bound_theta_0_4", beta1_at_04);
    out.note("omega_tq_minus_E", eff.omega_tq - p.energy());
    let g_mhz = rad_per_ns_to_mhz(eff.g.abs());
    out.checks.push(Check::within(6, "g/2pi (MHz)", g_mhz, 5.8, 6.6));
    out.checks.push(Check::at_most(
        6,
        "|omega_tq - E| / E",
        (eff.omega_tq - p.energy()).abs() / p.energy(),
        1e-12,
    ));
    out.checks.push(Check::below(6, "|beta_2|", nc.beta[1].abs(), 1.0 / 40.0));
    out.checks.push(Check::at_most(6, "E_M J1(0.4)/omega", beta1_at_04, 1.0 / 50.0));
    out.tables.push(t);
    Ok(out)
}

pub(super) fn rwa_check(cfg: &Config) -> Result<Outcome, ExperimentError> {
    let p = drive_params(cfg)?;
    let g = effective_params(&p)?.g.abs();
    let p = p.with_energy(cfg.f64("rwa_omega_tq_over_g") * g);
    let r = validate_rwa(&p, cfg.usize("rwa_periods")?, cfg.usize("rwa_samples_per_period")?)?;

    let mut t = Table::new("rwa_traces", &["t", "F_full", "F_jc", "F_jc_ajc"]);
    for (i, &time) in r.times.iter().enumerate() {
        t.push([num(time), num(r.f_full[i]), num(r.f_jc[i]), num(r.f_jc_ajc[i])]);
    }
    let mut out = Outcome::default();
    out.note("g", r.g);
    out.note("omega_tq", r.omega_tq);
    out.note("omega_tq_over_g", r.omega_tq / r.g.abs());
    out.note("max_diff_jc_ajc", r.max_diff_jc_ajc);
    out.note("max_diff_full_jc_transfer", r.max_diff_full_jc_transfer);
    out.note("max_diff_full_jc", r.max_diff_full_jc);
    out.note("raw_frame_diff_full_jc_transfer", r.raw_frame_diff_full_jc_transfer);
    out.note("max_state_infidelity_full_jc", r.max_state_infidelity_full_jc);
    out.note("fock_change", r.fock_change);
    out.note("n_fock", r.n_fock);
    if r.fock_change > 1e-6 {
        out.warnings.push(format!("Fock doubling changed the traces by {:.3e}", r.fock_change));
    }
    out.checks.push(Check::below(7, "max |F_JC - F_JC+AJC| over 3 periods", r.max_diff_jc_ajc, 2e-3));
    out.checks.push(Check::below(7, "max |F_full - F_JC| over one transfer", r.max_diff_full_jc_transfer, 1e-2));
    out.checks.push(Check::below(0, "norm defect", r.max_norm_defect, 1e-8));
    out.tables.push(t);
    Ok(out)
}
