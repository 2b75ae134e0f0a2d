use majorana_bus::nanowire::{
    build_blocks, critical_field, disorder_sweep, length_scan, low_spectrum, site_weights, wavefunction_overlap,
    zeeman_scan, DisorderKind, DisorderSpec, EdgeStatePair, NanowireParams,
};
use majorana_bus::perturb::{compare_exact_with, log_log_slope, median_abs_residual, CleanReference};

use super::{num, Check, ExperimentError, Outcome, Table};
use crate::config::{Config, ConfigError};

pub(super) fn wire_params(cfg: &Config) -> Result<NanowireParams, ExperimentError> {
    let a = cfg.f64("lattice_nm");
    let p = NanowireParams {
        n_sites: (cfg.f64("wire_length_nm") / a).round() as usize,
        a,
        m_star: cfg.f64("m_star"),
        alpha: cfg.f64("alpha_mev_nm"),
        delta: cfg.f64("delta_mev"),
        mu_eff: cfg.f64("mu_mev"),
        zeeman_h: cfg.f64("zeeman_mev"),
    };
    p.validate()?;
    Ok(p)
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn edge_states(p: &NanowireParams) -> Result<EdgeStatePair, ExperimentError> {
    Ok(low_spectrum(&build_blocks(p, None)?, true).edge_states()?)
}

pub(super) fn fig2a(cfg: &Config) -> Result<Outcome, ExperimentError> {
    let p = wire_params(cfg)?;
    let hc = critical_field(&p);
    let w = cfg.f64("transition_window_mev");
    let (lo, hi) = (cfg.f64("protected_h_min_mev"), cfg.f64("protected_h_max_mev"));
    let mut grid = linspace(0.0, cfg.f64("zeeman_scan_max_mev"), cfg.usize("zeeman_scan_points")?);
    grid.extend([hc - w, hc + w]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let rows = zeeman_scan(&p, &grid)?;

    let mut t = Table::new("fig2a_zeeman", &["h_meV", "L_nm", "eps1_meV", "eps2_meV"]);
    for r in &rows {
        t.push([num(r.h_mev), num(r.length_nm), num(r.eps1_mev), num(r.eps2_mev)]);
    }
    let at = |h: f64| rows.iter().find(|r| r.h_mev == h).expect("grid contains window edges");
    let below = at(hc - w).eps1_mev;
    let above = at(hc + w).eps1_mev;
    let protected: Vec<_> = rows.iter().filter(|r| (lo..=hi).contains(&r.h_mev)).collect();
    let eps2_min = protected.iter().map(|r| r.eps2_mev).fold(f64::INFINITY, f64::min);
    let eps1_max = protected.iter().map(|r| r.eps1_mev).fold(0.0, f64::max);

    let mut out = Outcome::default();
    out.note("h_c_meV", hc);
    out.note("length_nm", p.length_nm());
    out.note("eps1_below_window_meV", below);
    out.note("eps1_above_window_meV", above);
    out.note("eps1_at_zero_field_meV", rows[0].eps1_mev);
    out.note("eps1_max_protected_meV", eps1_max);
    out.note("eps2_min_protected_meV", eps2_min);
    out.checks.push(Check::within(1, "h_c (meV)", hc, 1.068, 1.168));
    out.checks.push(Check::at_least(1, "eps1(h_c - w) / eps1(h_c + w)", below / above, 100.0));
    out.checks.push(Check::at_least(1, "min eps2 over protected h range (meV)", eps2_min, 0.05));
    out.tables.push(t);
    Ok(out)
}

pub(super) fn fig2b(cfg: &Config) -> Result<Outcome, ExperimentError> {
    let p = wire_params(cfg)?;
    let (lo, hi, step) = (
        cfg.f64("length_scan_min_nm"),
        cfg.f64("length_scan_max_nm"),
        cfg.f64("length_scan_step_nm"),
    );
    if !(step > 0.0 && hi >= lo) {
        return Err(ExperimentError::Failed(format!("bad length grid {lo}..{hi} step {step}")));
    }
    let n = ((hi - lo) / step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| lo + step * k as f64).collect();
    let scan = length_scan(&p, &grid)?;

    let mut t = Table::new("fig2b_length", &["L_nm", "h_meV", "eps1_meV", "eps2_meV"]);
    for r in &scan.rows {
        t.push([num(r.length_nm), num(r.h_mev), num(r.eps1_mev), num(r.eps2_mev)]);
    }
    let mut m = Table::new("fig2b_maxima", &["L_nm", "eps1_meV"]);
    for &(l, e) in &scan.fit.maxima {
        m.push([num(l), num(e)]);
    }
    let fit = &scan.fit;
    let mut out = Outcome::default();
    out.note("xi_nm", fit.xi_nm);
    out.note("correlation", fit.correlation);
    out.note("slope_per_nm", fit.slope);
    out.note("intercept", fit.intercept);
    out.note("n_maxima", fit.maxima.len());
    out.note("mean_period_nm", fit.mean_period());
    out.note("min_eps1_meV", scan.rows.iter().map(|r| r.eps1_mev).fold(f64::INFINITY, f64::min));
    out.checks.push(Check::within(2, "envelope xi (nm)", fit.xi_nm, 200.0, 260.0));
    out.checks.push(Check::at_least(2, "|fit correlation|", fit.correlation.abs(), 0.95));
    out.tables.push(t);
    out.tables.push(m);
    Ok(out)
}

/// Spacing of consecutive ε1(L) maxima in a window around `p`'s length.
fn local_period(p: &NanowireParams) -> Result<f64, ExperimentError> {
    let l0 = p.length_nm();
    let grid: Vec<f64> = (0..=80).map(|k| l0 - 400.0 + 10.0 * k as f64).collect();
    let scan = length_scan(p, &grid)?;
    scan.fit
        .mean_period()
        .ok_or_else(|| ExperimentError::Failed("no oscillation period found near L".into()))
}

pub(super) fn fig2c(cfg: &Config) -> Result<Outcome, ExperimentError> {
    let p = wire_params(cfg)?;
    let period = local_period(&p)?;
    let q = p.with_length_nm(p.length_nm() + period);
    let a = edge_states(&p)?;
    let b = edge_states(&q)?;

    let mut t = Table::new("fig2c_edge_states", &["L_nm", "site", "x_nm", "weight_L", "weight_R"]);
    for (params, edge) in [(&p, &a), (&q, &b)] {
        let wl = site_weights(&edge.psi_l);
        let wr = site_weights(&edge.psi_r);
        for (i, (l, r)) in wl.iter().zip(&wr).enumerate() {
            t.push([
                num(params.length_nm()),
                i.to_string(),
                num(i as f64 * params.a),
                num(*l),
                num(*r),
            ]);
        }
    }
    let overlap_lr = a.overlap().norm();
    let stability = wavefunction_overlap(&a.psi_l, &b.psi_l);
    let (dl, dr) = a.chirality_defects();
    let mut out = Outcome::default();
    out.note("period_nm", period);
    out.note("overlap_L_R", overlap_lr);
    out.note("density_overlap_L_R", a.density_overlap());
    out.note("overlap_L_across_period", stability);
    out.note("left_quarter_weight", a.left_weight(0.25));
    out.note("right_quarter_weight", a.right_weight(0.25));
    out.note("chirality_defects", [dl, dr]);
    out.note("eps1_meV", a.epsilon_1);
    out.note("eps2_meV", a.epsilon_2);
    out.checks.push(Check::below(3, "|<psi_L|psi_R>|", overlap_lr, 1e-3));
    out.checks.push(Check::above(3, "|<psi_L(L)|psi_L(L + period)>|", stability, 0.99));
    out.checks.push(Check::below(0, "chirality defect", dl.max(dr), 1e-8));
    out.tables.push(t);
    Ok(out)
}

pub(super) fn fig3(cfg: &Config, kind: DisorderKind) -> Result<Outcome, ExperimentError> {
    let p = wire_params(cfg)?;
    let (tag, wmax, points) = match kind {
        DisorderKind::PairingPhase => ("phase", cfg.f64("phase_disorder_w_max_rad"), cfg.usize("phase_disorder_w_points")?),
        _ => ("mu", cfg.f64("mu_disorder_w_max_mev"), cfg.usize("mu_disorder_w_points")?),
    };
    if points < 2 {
        return Err(ExperimentError::Failed("a disorder grid needs at least two points".into()));
    }
    let grid = linspace(0.0, wmax, points);
    let stats = disorder_sweep(&p, kind, &grid, cfg.usize("disorder_realizations")?, cfg.seed())?;

    let mut rt = Table::new(
        &format!("fig3_{tag}_realizations"),
        &["W", "realization", "seed", "eps1_meV", "eps2_meV", "overlap_L", "overlap_R", "flagged", "degenerate"],
    );
    let mut st = Table::new(
        &format!("fig3_{tag}_stats"),
        &["W", "mean_eps1_meV", "sigma_meV", "eta", "mean_overlap_L", "mean_overlap_R", "n_used", "n_flagged", "n_degenerate"],
    );
    let mut out = Outcome::default();
    for s in &stats {
        for r in &s.rows {
            rt.push([
                num(r.w),
                r.index.to_string(),
                r.seed.to_string(),
                num(r.eps1_mev),
                num(r.eps2_mev),
                num(r.overlap_l),
                num(r.overlap_r),
                r.flagged.to_string(),
                r.degenerate.to_string(),
            ]);
        }
        st.push([
            num(s.w),
            num(s.mean_eps1),
            num(s.sigma),
            num(s.eta),
            num(s.mean_overlap_l),
            num(s.mean_overlap_r),
            s.n_used.to_string(),
            s.n_flagged.to_string(),
            s.n_degenerate.to_string(),
        ]);
        if s.n_flagged > 0 {
            out.warnings.push(format!("W = {}: {} realizations flagged", s.w, s.n_flagged));
        }
    }
    let clean = stats[0].clean_eps1;
    let drift: Vec<f64> = stats.iter().map(|s| (s.mean_eps1 - clean).abs() / clean).collect();
    let mid = &stats[stats.len() / 2];
    let last = stats.last().expect("non-empty grid");
    out.note("kind", kind.name());
    out.note("clean_eps1_meV", clean);
    out.note("max_relative_drift", drift.iter().copied().fold(0.0, f64::max));
    out.note("mid_grid_W", mid.w);
    out.note("mid_grid_overlap", [mid.mean_overlap_l, mid.mean_overlap_r]);
    out.note("eta", stats.iter().map(|s| s.eta).collect::<Vec<_>>());
    out.note("mean_eps1_at_W_max_over_clean", last.mean_eps1 / clean);
    match kind {
        DisorderKind::PairingPhase => {
            let dev = (last.mean_eps1 / clean - 1.0).abs();
            out.checks.push(Check::above(4, "|<eps1>(W_max)/eps1(0) - 1| (phase)", dev, 0.20));
        }
        _ => {
            let worst = drift.iter().copied().fold(0.0, f64::max);
            out.checks.push(Check::below(4, "max_W |<eps1> - eps1(0)|/eps1(0) (mu)", worst, 0.10));
            let ov = mid.mean_overlap_l.min(mid.mean_overlap_r);
            out.checks.push(Check::above(4, "mean overlap at mid-grid W (mu)", ov, 0.99));
        }
    }
    out.tables.push(rt);
    out.tables.push(st);
    Ok(out)
}

fn parse_kind(s: &str) -> Result<DisorderKind, ConfigError> {
    match s {
        "chemical_potential" => Ok(DisorderKind::ChemicalPotential),
        "pairing_phase" => Ok(DisorderKind::PairingPhase),
        "nuclear_zeeman" => Ok(DisorderKind::NuclearZeeman),
        other => Err(ConfigError::Type {
            key: "perturb_kind".into(),
            expected: "chemical_potential, pairing_phase or nuclear_zeeman",
            found: other.into(),
        }),
    }
}

pub(super) fn perturb_check(cfg: &Config) -> Result<Outcome, ExperimentError> {
    let p = wire_params(cfg)?;
    let kind = parse_kind(cfg.str("perturb_kind"))?;
    let ws = cfg.f64_list("perturb_w_mev");
    let n = cfg.usize("perturb_realizations")?;
    let clean = CleanReference::new(&p)?;

    let mut t = Table::new(
        "perturb_check",
        &[
            "realization",
            "W",
            "eps1_exact_meV",
            "eps1_pert_meV",
            "d1_meV",
            "d2_bulk_meV",
            "d2_edge_meV",
            "residual_meV",
            "seed",
        ],
    );
    let mut medians = Vec::new();
    let (mut diag, mut partner) = (0.0_f64, 0.0_f64);
    for &w in &ws {
        let spec = DisorderSpec::new(kind, w, n, cfg.seed())?;
        let rows = compare_exact_with(&p, &spec, &clean)?;
        for r in &rows {
            t.push([
                r.realization.to_string(),
                num(r.w),
                num(r.eps1_exact_mev),
                num(r.eps1_pert_mev),
                num(r.d1_mev),
                num(r.d2_bulk_mev),
                num(r.d2_edge_mev),
                num(r.residual_mev),
                r.seed.to_string(),
            ]);
            diag = diag.max(r.diagonal_ratio);
            partner = partner.max(r.partner_defect);
        }
        medians.push((w, median_abs_residual(&rows)));
    }
    let mut out = Outcome::default();
    out.note("kind", kind.name());
    out.note("eps1_clean_meV", clean.spectrum.epsilon(1));
    out.note("median_abs_residual_meV", &medians);
    out.note("max_diagonal_ratio", diag);
    out.note("max_partner_defect", partner);
    out.checks.push(Check::below(5, "max <psi_k|V|psi_k>/|V|", diag, 1e-10));
    out.checks.push(Check::below(5, "max |d2(+1) + d2(-1)| relative", partner, 1e-10));
    if medians.len() >= 2 && medians.iter().all(|m| m.1 > 0.0) {
        let slope = log_log_slope(&medians);
        out.note("residual_slope", slope);
        out.checks.push(Check::within(5, "log-log residual slope", slope, 2.5, 3.5));
    } else {
        out.checks.push(Check::holds(5, "residual slope defined (>= 2 positive W points)", false));
    }
    out.tables.push(t);
    Ok(out)
}
