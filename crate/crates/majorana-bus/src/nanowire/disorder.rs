use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NanowireError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderKind {
    /// Site-random shift δμ_i of the chemical potential (meV).
    ChemicalPotential,
    /// Site-random phase δθ_i of the pairing amplitude (rad).
    PairingPhase,
    /// Site-random Zeeman vector field (meV), e.g. from nuclear spins.
    NuclearZeeman,
}

impl DisorderKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::ChemicalPotential => "chemical_potential",
            Self::PairingPhase => "pairing_phase",
            Self::NuclearZeeman => "nuclear_zeeman",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    /// Amplitude W: draws are uniform in [−W, W].
    pub amplitude: f64,
    pub n_realizations: usize,
    pub master_seed: u64,
}

impl DisorderSpec {
    pub fn new(kind: DisorderKind, amplitude: f64, n_realizations: usize, master_seed: u64) -> Result<Self, NanowireError> {
        let spec = Self {
            kind,
            amplitude,
            n_realizations,
            master_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NanowireError> {
        if !(self.amplitude >= 0.0) || self.n_realizations == 0 {
            return Err(NanowireError::InvalidDisorder(format!(
                "W = {}, n_realizations = {}",
                self.amplitude, self.n_realizations
            )));
        }
        Ok(())
    }

    /// Seed of realization `index`.
    pub fn seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }

    /// Draw of realization `index` for a chain of `n_sites`.
    ///
    /// The unit-amplitude draw depends only on `(master_seed, index)`; it is
    /// scaled by W, so changing W rescales the same configuration.
    pub fn draw(&self, index: usize, n_sites: usize) -> DisorderDraw {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed(index));
        let w = self.amplitude;
        match self.kind {
            DisorderKind::ChemicalPotential => DisorderDraw::ChemicalPotential(
                (0..n_sites).map(|_| w * rng.random_range(-1.0..=1.0)).collect(),
            ),
            DisorderKind::PairingPhase => DisorderDraw::PairingPhase(
                (0..n_sites).map(|_| w * rng.random_range(-1.0..=1.0)).collect(),
            ),
            DisorderKind::NuclearZeeman => DisorderDraw::NuclearZeeman(
                (0..n_sites)
                    .map(|_| {
                        // uniform in the ball |b| ≤ W
                        loop {
                            let b: [f64; 3] = [
                                rng.random_range(-1.0..=1.0),
                                rng.random_range(-1.0..=1.0),
                                rng.random_range(-1.0..=1.0),
                            ];
                            if b.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                                break [w * b[0], w * b[1], w * b[2]];
                            }
                        }
                    })
                    .collect(),
            ),
        }
    }
}

/// Per-site values of one disorder realization.
#[derive(Clone, Debug, PartialEq)]
pub enum DisorderDraw {
    ChemicalPotential(Vec<f64>),
    PairingPhase(Vec<f64>),
    NuclearZeeman(Vec<[f64; 3]>),
}

impl DisorderDraw {
    pub fn n_sites(&self) -> usize {
        match self {
            Self::ChemicalPotential(v) | Self::PairingPhase(v) => v.len(),
            Self::NuclearZeeman(v) => v.len(),
        }
    }
}

/// SplitMix64 mix of a master seed and a stream index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
