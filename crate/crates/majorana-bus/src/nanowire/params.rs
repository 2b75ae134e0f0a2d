use serde::{Deserialize, Serialize};

use super::NanowireError;
use crate::units::HBAR2_OVER_2ME_MEV_NM2;

/// Spin-orbit coupled nanowire on a 1D lattice. Energies in meV, lengths in nm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NanowireParams {
    pub n_sites: usize,
    /// Lattice spacing (nm).
    pub a: f64,
    /// Effective mass in units of the bare electron mass.
    pub m_star: f64,
    /// Rashba spin-orbit strength (meV·nm).
    pub alpha: f64,
    /// Pairing amplitude Δ (meV).
    pub delta: f64,
    /// Chemical potential measured from the band bottom (meV).
    pub mu_eff: f64,
    /// Zeeman splitting h (meV).
    pub zeeman_h: f64,
}

impl NanowireParams {
    /// InSb-like wire: m* = 0.015, a = 10 nm, α = 20 meV·nm, Δ = 0.5 meV, μ = 1 meV, h = 1.5 meV.
    pub fn insb(n_sites: usize) -> Self {
        Self {
            n_sites,
            a: 10.0,
            m_star: 0.015,
            alpha: 20.0,
            delta: 0.5,
            mu_eff: 1.0,
            zeeman_h: 1.5,
        }
    }

    pub fn validate(&self) -> Result<(), NanowireError> {
        let ok = self.n_sites >= 4
            && self.a > 0.0
            && self.m_star > 0.0
            && self.delta >= 0.0
            && self.alpha.is_finite()
            && self.mu_eff.is_finite()
            && self.zeeman_h.is_finite();
        if ok {
            Ok(())
        } else {
            Err(NanowireError::InvalidParams(format!("{self:?}")))
        }
    }

    /// Hopping t = ħ²/(2m*a²) in meV.
    pub fn hopping(&self) -> f64 {
        HBAR2_OVER_2ME_MEV_NM2 / (self.m_star * self.a * self.a)
    }

    /// Nearest-neighbour spin-orbit amplitude λ = α/(2a) in meV.
    pub fn soc(&self) -> f64 {
        self.alpha / (2.0 * self.a)
    }

    pub fn length_nm(&self) -> f64 {
        self.n_sites as f64 * self.a
    }

    /// Same wire with `n_sites = round(L/a)`.
    pub fn with_length_nm(&self, length: f64) -> Self {
        Self {
            n_sites: (length / self.a).round() as usize,
            ..self.clone()
        }
    }

    pub fn with_zeeman(&self, h: f64) -> Self {
        Self {
            zeeman_h: h,
            ..self.clone()
        }
    }

    /// Dimension of the BdG matrix, 4 per site.
    pub fn bdg_dim(&self) -> usize {
        4 * self.n_sites
    }
}

/// h_c = sqrt(μ² + Δ²), the field above which edge modes appear.
pub fn critical_field(params: &NanowireParams) -> f64 {
    params.mu_eff.hypot(params.delta)
}
