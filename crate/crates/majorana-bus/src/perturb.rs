//! First- and second-order shifts of the edge-state splitting under a
//! disorder potential, checked against exact diagonalization.
//!
//! States are normalized so that `ψ_{+1} = (ψ_L + ψ_R)/√2`. In this
//! normalization the first-order shift is `Re⟨ψ_L|V|ψ_R⟩` and the edge part of
//! the second-order shift is `(Im⟨ψ_L|V|ψ_R⟩)²/(2ε1)`.

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::nanowire::{
    self, build_blocks, diagonalize, low_spectrum, site_block, BdgBlocks, BdgSpectrum, Block4,
    DisorderDraw, DisorderSpec, EdgeStatePair, NanowireError, NanowireParams,
};
use crate::qcore::{inner, EnergyUnit, HilbertSpace, Operator, C64};

/// Below this ε1 (meV) the edge term is singular and no number is returned.
pub const DEGENERATE_EPS1: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("ε1 = {0:.3e} meV is an exact magic point; degenerate perturbation theory required")]
    Degenerate(f64),
    #[error("perturbation breaks particle-hole symmetry: max |ΣVΣ⁻¹ + V| = {0:.3e}")]
    SymmetryBroken(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Nanowire(#[from] NanowireError),
}

/// Site-diagonal perturbation `V = H_disordered − H_clean`, one 4×4 block per site.
#[derive(Clone, Debug)]
pub struct LocalPerturbation {
    pub blocks: Vec<Block4>,
}

impl LocalPerturbation {
    pub fn from_draw(params: &NanowireParams, draw: &DisorderDraw) -> Self {
        let blocks = (0..params.n_sites)
            .map(|i| {
                let dis = site_block(params, Some(draw), i);
                let clean = site_block(params, None, i);
                let mut v = dis;
                for r in 0..4 {
                    for c in 0..4 {
                        v[r][c] -= clean[r][c];
                    }
                }
                v
            })
            .collect();
        Self { blocks }
    }

    pub fn n_sites(&self) -> usize {
        self.blocks.len()
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for (i, b) in self.blocks.iter().enumerate() {
            for r in 0..4 {
                out[4 * i + r] = (0..4).map(|c| b[r][c] * psi[4 * i + c]).sum();
            }
        }
        out
    }

    /// `⟨a|V|b⟩`.
    pub fn element(&self, a: &[C64], b: &[C64]) -> C64 {
        inner(a, &self.apply(b))
    }

    pub fn norm_max(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.norm()))
    }

    pub fn particle_hole_defect(&self) -> f64 {
        let as_bdg = BdgBlocks {
            diag: self.blocks.clone(),
            upper: Vec::new(),
        };
        as_bdg.particle_hole_defect()
    }

    pub fn to_operator(&self) -> Operator {
        let n = self.n_sites();
        let mut m = Mat::<C64>::zeros(4 * n, 4 * n);
        for (i, b) in self.blocks.iter().enumerate() {
            for r in 0..4 {
                for c in 0..4 {
                    m[(4 * i + r, 4 * i + c)] = b[r][c];
                }
            }
        }
        Operator::new(
            HilbertSpace::new(vec![n, 4]).expect("n_sites ≥ 1"),
            m,
            EnergyUnit::MilliElectronVolt,
        )
        .expect("dimensions agree")
    }
}

/// `V` for realization `index` of `spec`, verified to anticommute with Σ.
pub fn perturbation_operator(
    params: &NanowireParams,
    spec: &DisorderSpec,
    index: usize,
) -> Result<LocalPerturbation, PerturbError> {
    let v = LocalPerturbation::from_draw(params, &spec.draw(index, params.n_sites));
    let defect = v.particle_hole_defect();
    if defect > 1e-10 {
        return Err(PerturbError::SymmetryBroken(defect));
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FirstOrder {
    /// `⟨ψ_{+1}|V|ψ_{+1}⟩ = Re⟨ψ_L|V|ψ_R⟩`; the shift of ε_{−1} is its negative.
    pub delta: f64,
    pub v_lr: C64,
    /// Diagonal elements, zero for a particle-hole odd `V`.
    pub v_ll: C64,
    pub v_rr: C64,
}

pub fn first_order(edge: &EdgeStatePair, v: &LocalPerturbation) -> FirstOrder {
    let v_lr = v.element(&edge.psi_l, &edge.psi_r);
    let v_ll = v.element(&edge.psi_l, &edge.psi_l);
    let v_rr = v.element(&edge.psi_r, &edge.psi_r);
    FirstOrder {
        delta: 0.5 * (v_ll.re + v_rr.re) + v_lr.re,
        v_lr,
        v_ll,
        v_rr,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationResult {
    pub delta_eps1_first: f64,
    /// Second-order shift of ε_{+1}: `Σ_{m≠+1} |⟨m|V|+1⟩|²/(ε1 − ε_m)`.
    pub delta_eps1_second: f64,
    /// Contribution of the levels `±n`, `n > 1`.
    pub term_bulk: f64,
    /// Contribution of the partner level `−1`: `|⟨−1|V|+1⟩|²/(2ε1)`.
    ///
    /// Zero up to rounding whenever `ΣVΣ⁻¹ = −V`, since `⟨Σψ|V|ψ⟩ = −⟨Σψ|V|ψ⟩`.
    pub term_edge: f64,
    /// `Σ_{n>1} (l_n r_n + l_{−n} r_{−n})/(ε_n − ε_{+1})`, the cross-edge sum
    /// written in terms of the edge states.
    pub term_bulk_lr: C64,
    /// Second-order shift of ε_{−1}, computed from the eigensolver's `ψ_{−1}`.
    pub partner_second: f64,
    /// `Σ_m |term_m|` for ε_{+1}, the magnitude scale of the cancelling sum.
    pub second_order_scale: f64,
    /// Labels `n` for `l_n`, `r_n`.
    pub labels: Vec<isize>,
    /// `⟨ψ_L|V|ψ_n⟩`.
    pub l_n: Vec<C64>,
    /// `⟨ψ_n|V|ψ_R⟩`.
    pub r_n: Vec<C64>,
}

impl PerturbationResult {
    /// `|δ2(+1) + δ2(−1)|` relative to the summed term magnitudes.
    ///
    /// Dividing by `|δ2|` instead blows up at realizations where the sum
    /// nearly cancels; see [`Self::naive_antisymmetry_defect`].
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = (self.delta_eps1_second + self.partner_second).abs();
        if self.second_order_scale == 0.0 {
            d
        } else {
            d / self.second_order_scale
        }
    }

    /// `|δ2(+1) + δ2(−1)| / |δ2(+1)|`.
    pub fn naive_antisymmetry_defect(&self) -> f64 {
        (self.delta_eps1_second + self.partner_second).abs()
            / self.delta_eps1_second.abs().max(f64::MIN_POSITIVE)
    }
}

fn second_order_sum(spec: &BdgSpectrum, vpsi: &[C64], label: isize) -> (f64, f64, f64) {
    // (sum over ±n with n > 1, partner term, Σ|term|)
    let e = spec.epsilon(label);
    let own = spec.index_of(label);
    let partner = spec.index_of(-label);
    let mut bulk = 0.0;
    let mut edge = 0.0;
    let mut scale = 0.0;
    for m in 0..spec.eigenvalues.len() {
        if m == own {
            continue;
        }
        let col = spec.eigenvectors.col(m);
        let amp: C64 = (0..vpsi.len()).map(|i| col[i].conj() * vpsi[i]).sum();
        let term = amp.norm_sqr() / (e - spec.eigenvalues[m]);
        scale += term.abs();
        if m == partner {
            edge = term;
        } else {
            bulk += term;
        }
    }
    (bulk, edge, scale)
}

/// Second-order corrections from the full clean spectrum.
pub fn second_order(
    spec: &BdgSpectrum,
    edge: &EdgeStatePair,
    v: &LocalPerturbation,
) -> Result<PerturbationResult, PerturbError> {
    if 4 * v.n_sites() != spec.eigenvalues.len() || edge.psi_l.len() != spec.eigenvalues.len() {
        return Err(PerturbError::Dimension(format!(
            "V on {} sites, spectrum of dimension {}",
            v.n_sites(),
            spec.eigenvalues.len()
        )));
    }
    let e1 = spec.epsilon(1);
    if e1 < DEGENERATE_EPS1 {
        return Err(PerturbError::Degenerate(e1));
    }
    let first = first_order(edge, v);
    let (bulk, edge_term, scale) = second_order_sum(spec, &v.apply(&spec.psi(1)), 1);
    let (pb, pe, _) = second_order_sum(spec, &v.apply(&spec.psi(-1)), -1);

    let half = 2 * spec.n_sites as isize;
    let labels: Vec<isize> = (-half..=half).filter(|n| n.abs() > 1).collect();
    let vl = v.apply(&edge.psi_l);
    let vr = v.apply(&edge.psi_r);
    let mut l_n = Vec::with_capacity(labels.len());
    let mut r_n = Vec::with_capacity(labels.len());
    let mut term_bulk_lr = C64::new(0.0, 0.0);
    for &n in &labels {
        let psi = spec.psi(n);
        let l = inner(&vl, &psi);
        let r = inner(&psi, &vr);
        term_bulk_lr += l * r / (spec.epsilon(n.abs()) - e1);
        l_n.push(l);
        r_n.push(r);
    }
    Ok(PerturbationResult {
        delta_eps1_first: first.delta,
        delta_eps1_second: bulk + edge_term,
        term_bulk: bulk,
        term_edge: edge_term,
        term_bulk_lr,
        partner_second: pb + pe,
        second_order_scale: scale,
        labels,
        l_n,
        r_n,
    })
}

/// One realization of the perturbative-versus-exact comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub realization: usize,
    pub seed: u64,
    pub w: f64,
    pub eps1_clean_mev: f64,
    pub eps1_exact_mev: f64,
    /// `ε1 + δ^{(1)} + δ^{(2)}`.
    pub eps1_pert_mev: f64,
    pub d1_mev: f64,
    pub d2_bulk_mev: f64,
    pub d2_edge_mev: f64,
    pub residual_mev: f64,
    /// `max(|⟨ψ_L|V|ψ_L⟩|, |⟨ψ_R|V|ψ_R⟩|) / ‖V‖_max`.
    pub diagonal_ratio: f64,
    /// [`PerturbationResult::antisymmetry_defect`].
    pub partner_defect: f64,
    /// [`PerturbationResult::naive_antisymmetry_defect`].
    pub partner_defect_naive: f64,
}

/// Clean reference shared across realizations.
pub struct CleanReference {
    pub spectrum: BdgSpectrum,
    pub edge: EdgeStatePair,
}

impl CleanReference {
    pub fn new(params: &NanowireParams) -> Result<Self, PerturbError> {
        let spectrum = diagonalize(&nanowire::build_bdg(params, None)?)?;
        let edge = nanowire::extract_edge_states(&spectrum)?;
        Ok(Self { spectrum, edge })
    }
}

fn compare_one(
    params: &NanowireParams,
    spec: &DisorderSpec,
    index: usize,
    clean: &CleanReference,
) -> Result<ComparisonRow, PerturbError> {
    let v = perturbation_operator(params, spec, index)?;
    let pr = second_order(&clean.spectrum, &clean.edge, &v)?;
    let first = first_order(&clean.edge, &v);
    let draw = spec.draw(index, params.n_sites);
    let exact = low_spectrum(&build_blocks(params, Some(&draw))?, false).epsilon_1;
    let e1 = clean.spectrum.epsilon(1);
    let pert = e1 + pr.delta_eps1_first + pr.delta_eps1_second;
    let vmax = v.norm_max();
    Ok(ComparisonRow {
        realization: index,
        seed: spec.seed(index),
        w: spec.amplitude,
        eps1_clean_mev: e1,
        eps1_exact_mev: exact,
        eps1_pert_mev: pert,
        d1_mev: pr.delta_eps1_first,
        d2_bulk_mev: pr.term_bulk,
        d2_edge_mev: pr.term_edge,
        residual_mev: exact - pert,
        diagonal_ratio: if vmax > 0.0 {
            first.v_ll.norm().max(first.v_rr.norm()) / vmax
        } else {
            0.0
        },
        partner_defect: pr.antisymmetry_defect(),
        partner_defect_naive: if pr.delta_eps1_second == 0.0 {
            0.0
        } else {
            pr.naive_antisymmetry_defect()
        },
    })
}

/// Perturbative ε1 versus exact diagonalization for every realization of `spec`.
pub fn compare_exact(params: &NanowireParams, spec: &DisorderSpec) -> Result<Vec<ComparisonRow>, PerturbError> {
    let clean = CleanReference::new(params)?;
    compare_exact_with(params, spec, &clean)
}

/// As [`compare_exact`] with a precomputed clean reference.
pub fn compare_exact_with(
    params: &NanowireParams,
    spec: &DisorderSpec,
    clean: &CleanReference,
) -> Result<Vec<ComparisonRow>, PerturbError> {
    spec.validate()?;
    (0..spec.n_realizations)
        .into_par_iter()
        .map(|i| compare_one(params, spec, i, clean))
        .collect()
}

/// Median of `|residual|`.
pub fn median_abs_residual(rows: &[ComparisonRow]) -> f64 {
    let mut r: Vec<f64> = rows.iter().map(|x| x.residual_mev.abs()).collect();
    r.sort_by(f64::total_cmp);
    let n = r.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        r[n / 2]
    } else {
        0.5 * (r[n / 2 - 1] + r[n / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
