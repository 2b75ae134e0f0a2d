use rayon::prelude::*;
use serde::Serialize;

use super::{build_blocks, low_spectrum, DisorderKind, DisorderSpec, EdgeStatePair, NanowireError, NanowireParams};
use crate::qcore::C64;

/// Realizations with ε1 below this are exact magic points and excluded from statistics (meV).
pub const DEGENERATE_EPS1: f64 = 1e-12;

/// One disorder realization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationRow {
    pub index: usize,
    pub seed: u64,
    pub w: f64,
    pub eps1_mev: f64,
    pub eps2_mev: f64,
    pub overlap_l: f64,
    pub overlap_r: f64,
    /// Particle-hole antisymmetry or edge extraction failed numerically.
    pub flagged: bool,
    /// ε1 below [`DEGENERATE_EPS1`].
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleStats {
    pub kind: DisorderKind,
    pub w: f64,
    pub clean_eps1: f64,
    pub mean_eps1: f64,
    /// `(⟨ε1²⟩ − ⟨ε1⟩²)^{1/2}`.
    pub sigma: f64,
    /// `σ / ⟨ε1⟩`.
    pub eta: f64,
    pub mean_overlap_l: f64,
    pub mean_overlap_r: f64,
    pub n_used: usize,
    pub n_flagged: usize,
    pub n_degenerate: usize,
    pub rows: Vec<RealizationRow>,
}

/// `|⟨a|b⟩|`, zero-padding the shorter vector on the right.
///
/// Maximizing `Re(e^{iφ}⟨a|b⟩)` over the global phase gives this modulus.
pub fn wavefunction_overlap(a: &[C64], b: &[C64]) -> f64 {
    let n = a.len().min(b.len());
    a[..n]
        .iter()
        .zip(&b[..n])
        .map(|(x, y)| x.conj() * y)
        .sum::<C64>()
        .norm()
}

fn clean_reference(params: &NanowireParams) -> Result<EdgeStatePair, NanowireError> {
    let blocks = build_blocks(params, None)?;
    low_spectrum(&blocks, true).edge_states()
}

fn realization(
    params: &NanowireParams,
    spec: &DisorderSpec,
    index: usize,
    reference: &EdgeStatePair,
) -> Result<RealizationRow, NanowireError> {
    let draw = spec.draw(index, params.n_sites);
    let blocks = build_blocks(params, Some(&draw))?;
    let low = low_spectrum(&blocks, true);
    let mut row = RealizationRow {
        index,
        seed: spec.seed(index),
        w: spec.amplitude,
        eps1_mev: low.epsilon_1,
        eps2_mev: low.epsilon_2,
        overlap_l: f64::NAN,
        overlap_r: f64::NAN,
        flagged: low.antisymmetry_defect() > super::ANTISYMMETRY_TOL,
        degenerate: low.epsilon_1 < DEGENERATE_EPS1,
    };
    match low.edge_states() {
        Ok(edge) => {
            row.overlap_l = wavefunction_overlap(&reference.psi_l, &edge.psi_l);
            row.overlap_r = wavefunction_overlap(&reference.psi_r, &edge.psi_r);
        }
        Err(NanowireError::IllSeparated { .. }) => row.flagged = true,
        Err(e) => return Err(e),
    }
    Ok(row)
}

fn summarize(kind: DisorderKind, w: f64, clean_eps1: f64, rows: Vec<RealizationRow>) -> EnsembleStats {
    let used: Vec<&RealizationRow> = rows.iter().filter(|r| !r.flagged && !r.degenerate).collect();
    let n = used.len() as f64;
    let mean = used.iter().map(|r| r.eps1_mev).sum::<f64>() / n;
    let var = used.iter().map(|r| (r.eps1_mev - mean).powi(2)).sum::<f64>() / n;
    let sigma = var.max(0.0).sqrt();
    EnsembleStats {
        kind,
        w,
        clean_eps1,
        mean_eps1: mean,
        sigma,
        eta: sigma / mean,
        mean_overlap_l: used.iter().map(|r| r.overlap_l).sum::<f64>() / n,
        mean_overlap_r: used.iter().map(|r| r.overlap_r).sum::<f64>() / n,
        n_used: used.len(),
        n_flagged: rows.iter().filter(|r| r.flagged).count(),
        n_degenerate: rows.iter().filter(|r| r.degenerate).count(),
        rows,
    }
}

fn run_ensemble(
    params: &NanowireParams,
    spec: &DisorderSpec,
    reference: &EdgeStatePair,
) -> Result<EnsembleStats, NanowireError> {
    spec.validate()?;
    let rows: Vec<RealizationRow> = (0..spec.n_realizations)
        .into_par_iter()
        .map(|i| realization(params, spec, i, reference))
        .collect::<Result<_, _>>()?;
    Ok(summarize(spec.kind, spec.amplitude, reference.epsilon_1, rows))
}

/// Statistics of ε1 and edge-state overlaps over `spec.n_realizations` draws.
///
/// Rows come back in realization order whatever the thread schedule.
pub fn disorder_ensemble(params: &NanowireParams, spec: &DisorderSpec) -> Result<EnsembleStats, NanowireError> {
    let reference = clean_reference(params)?;
    run_ensemble(params, spec, &reference)
}

/// One ensemble per amplitude in `w_grid`, sharing the clean reference and seeds.
pub fn disorder_sweep(
    params: &NanowireParams,
    kind: DisorderKind,
    w_grid: &[f64],
    n_realizations: usize,
    master_seed: u64,
) -> Result<Vec<EnsembleStats>, NanowireError> {
    let reference = clean_reference(params)?;
    w_grid
        .iter()
        .map(|&w| {
            let spec = DisorderSpec::new(kind, w, n_realizations, master_seed)?;
            run_ensemble(params, &spec, &reference)
        })
        .collect()
}
