use faer::Mat;

use super::banded::BandSolver;
use super::bdg::{site_weights, BdgBlocks, ParticleHole};
use super::NanowireError;
use crate::qcore::{eig_hermitian, inner, Operator, C64};

/// Tolerance on `|ε + ε'|` for particle-hole partners (meV).
pub const ANTISYMMETRY_TOL: f64 = 1e-9;
/// Minimum `ε2 − ε1` for a well-defined edge sector (meV).
pub const EDGE_SEPARATION_TOL: f64 = 1e-6;

/// Full BdG spectrum with particle-hole labels.
#[derive(Clone, Debug)]
pub struct BdgSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, same order.
    pub eigenvectors: Mat<C64>,
    pub n_sites: usize,
}

impl BdgSpectrum {
    fn half(&self) -> usize {
        2 * self.n_sites
    }

    /// Column index of label `n` (`+1` is the smallest non-negative level, `−1` its partner).
    pub fn index_of(&self, n: isize) -> usize {
        assert!(n != 0 && n.unsigned_abs() <= self.half(), "label out of range");
        if n > 0 {
            self.half() - 1 + n as usize
        } else {
            (self.half() as isize + n) as usize
        }
    }

    pub fn epsilon(&self, n: isize) -> f64 {
        self.eigenvalues[self.index_of(n)]
    }

    pub fn psi(&self, n: isize) -> Vec<C64> {
        let col = self.eigenvectors.col(self.index_of(n));
        (0..col.nrows()).map(|i| col[i]).collect()
    }

    /// `max_k |ε_k + ε_{−k}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.eigenvalues.len();
        (0..d / 2)
            .map(|k| (self.eigenvalues[k] + self.eigenvalues[d - 1 - k]).abs())
            .fold(0.0, f64::max)
    }
}

/// Dense diagonalization with particle-hole labelling.
pub fn diagonalize(h: &Operator) -> Result<BdgSpectrum, NanowireError> {
    let d = h.dim();
    if d % 4 != 0 {
        return Err(NanowireError::InvalidParams(format!("BdG dimension {d} not a multiple of 4")));
    }
    let eig = eig_hermitian(h).map_err(NanowireError::Core)?;
    let spec = BdgSpectrum {
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        n_sites: d / 4,
    };
    let defect = spec.antisymmetry_defect();
    if defect > ANTISYMMETRY_TOL {
        return Err(NanowireError::Antisymmetry(defect));
    }
    Ok(spec)
}

/// Edge-localized Majorana combinations of the lowest particle-hole pair.
#[derive(Clone, Debug)]
pub struct EdgeStatePair {
    pub psi_l: Vec<C64>,
    pub psi_r: Vec<C64>,
    pub epsilon_1: f64,
    pub epsilon_2: f64,
    /// `ψ_{+1}` in the gauge where `ψ_{+1} = (ψ_L + ψ_R)/√2`.
    pub psi_plus: Vec<C64>,
}

impl EdgeStatePair {
    /// Builds ψ_L = (ψ + Σψ)/‖·‖ and ψ_R = (ψ − Σψ)/‖·‖ from `ψ_{+1}`, with the
    /// global phase of ψ chosen to maximize the left-half weight of ψ_L.
    pub fn from_plus_state(psi_plus: &[C64], epsilon_1: f64, epsilon_2: f64) -> Result<Self, NanowireError> {
        if epsilon_2 - epsilon_1 < EDGE_SEPARATION_TOL {
            return Err(NanowireError::IllSeparated { epsilon_1, epsilon_2 });
        }
        let n_sites = psi_plus.len() / 4;
        let sigma = ParticleHole::new(n_sites);
        let s = sigma.apply(psi_plus);
        let half = 4 * (n_sites / 2);
        let c: C64 = inner(&psi_plus[..half], &s[..half]);
        let phase = C64::from_polar(1.0, 0.5 * c.arg());
        let psi: Vec<C64> = psi_plus.iter().map(|x| x * phase).collect();
        let spsi = sigma.apply(&psi);
        let mut l: Vec<C64> = psi.iter().zip(&spsi).map(|(a, b)| a + b).collect();
        let mut r: Vec<C64> = psi.iter().zip(&spsi).map(|(a, b)| a - b).collect();
        let nl = crate::qcore::norm(&l);
        let nr = crate::qcore::norm(&r);
        for x in l.iter_mut() {
            *x /= nl;
        }
        for x in r.iter_mut() {
            *x /= nr;
        }
        Ok(Self {
            psi_l: l,
            psi_r: r,
            epsilon_1,
            epsilon_2,
            psi_plus: psi,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.psi_l.len() / 4
    }

    /// `⟨ψ_L|ψ_R⟩`.
    pub fn overlap(&self) -> C64 {
        inner(&self.psi_l, &self.psi_r)
    }

    /// `Σ_i sqrt(w_L(i) w_R(i))` with site weights w; measures spatial overlap of the two densities.
    pub fn density_overlap(&self) -> f64 {
        site_weights(&self.psi_l)
            .iter()
            .zip(site_weights(&self.psi_r))
            .map(|(a, b)| (a * b).sqrt())
            .sum()
    }

    /// `(‖Σψ_L − ψ_L‖, ‖Σψ_R + ψ_R‖)`.
    pub fn chirality_defects(&self) -> (f64, f64) {
        let sigma = ParticleHole::new(self.n_sites());
        let sl = sigma.apply(&self.psi_l);
        let sr = sigma.apply(&self.psi_r);
        let dl = sl.iter().zip(&self.psi_l).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let dr = sr.iter().zip(&self.psi_r).map(|(a, b)| (a + b).norm_sqr()).sum::<f64>().sqrt();
        (dl, dr)
    }

    /// Fraction of `|ψ_L|²` on the leftmost `fraction` of the chain.
    pub fn left_weight(&self, fraction: f64) -> f64 {
        let w = site_weights(&self.psi_l);
        let cut = ((w.len() as f64) * fraction).round() as usize;
        w[..cut].iter().sum()
    }

    /// Fraction of `|ψ_R|²` on the rightmost `fraction` of the chain.
    pub fn right_weight(&self, fraction: f64) -> f64 {
        let w = site_weights(&self.psi_r);
        let cut = ((w.len() as f64) * (1.0 - fraction)).round() as usize;
        w[cut..].iter().sum()
    }
}

/// Edge states from a dense spectrum.
pub fn extract_edge_states(spec: &BdgSpectrum) -> Result<EdgeStatePair, NanowireError> {
    EdgeStatePair::from_plus_state(&spec.psi(1), spec.epsilon(1), spec.epsilon(2))
}

/// Low-lying levels computed on the block-tridiagonal form.
#[derive(Clone, Debug)]
pub struct LowSpectrum {
    pub epsilon_1: f64,
    pub epsilon_2: f64,
    /// Largest negative level; equals `−ε1` when particle-hole symmetry holds.
    pub epsilon_minus_1: f64,
    /// `ψ_{+1}` when requested.
    pub psi_plus: Option<Vec<C64>>,
    /// Residual `‖Hψ − εψ‖` of `ψ_{+1}`.
    pub residual: f64,
}

impl LowSpectrum {
    pub fn antisymmetry_defect(&self) -> f64 {
        (self.epsilon_1 + self.epsilon_minus_1).abs()
    }

    pub fn edge_states(&self) -> Result<EdgeStatePair, NanowireError> {
        let psi = self.psi_plus.as_ref().ok_or_else(|| {
            NanowireError::InvalidParams("low spectrum computed without eigenvector".into())
        })?;
        EdgeStatePair::from_plus_state(psi, self.epsilon_1, self.epsilon_2)
    }
}

/// Bisection tolerance for low levels (meV).
pub const LOW_LEVEL_TOL: f64 = 1e-13;

/// ε_{−1}, ε_{+1}, ε_{+2} (and optionally ψ_{+1}) without dense diagonalization.
pub fn low_spectrum(blocks: &BdgBlocks, with_vector: bool) -> LowSpectrum {
    let solver = BandSolver::new(blocks);
    let half = 2 * blocks.n_sites();
    let b = solver.spectral_bound() + 1.0;
    let pos = solver.eigenvalues(half, 2, -b, b, LOW_LEVEL_TOL);
    let neg = solver.eigenvalues(half - 1, 1, -b, b, LOW_LEVEL_TOL)[0];
    let (psi_plus, residual) = if with_vector {
        let (v, _rq, res) = solver.eigenvector(pos[0]);
        (Some(v), res)
    } else {
        (None, 0.0)
    };
    LowSpectrum {
        epsilon_1: pos[0],
        epsilon_2: pos[1],
        epsilon_minus_1: neg,
        psi_plus,
        residual,
    }
}
