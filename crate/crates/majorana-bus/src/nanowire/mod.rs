//! Spin-orbit nanowire in the Bogoliubov-de Gennes picture: Hamiltonian
//! construction, particle-hole symmetry, edge states, scans and disorder
//! ensembles.

mod banded;
mod bdg;
mod disorder;
mod ensemble;
mod params;
mod scans;
mod spectrum;

use thiserror::Error;

pub use banded::BandSolver;
pub use bdg::{
    build_bdg, build_blocks, hopping_block, site_block, site_weights, BdgBlocks, Block4, ParticleHole,
};
pub use disorder::{derive_seed, DisorderDraw, DisorderKind, DisorderSpec};
pub use ensemble::{disorder_ensemble, disorder_sweep, wavefunction_overlap, EnsembleStats, RealizationRow};
pub use params::{critical_field, NanowireParams};
pub use scans::{fit_envelope, length_scan, zeeman_scan, EnvelopeFit, LengthScan, ScanRow};
pub use spectrum::{
    diagonalize, extract_edge_states, low_spectrum, BdgSpectrum, EdgeStatePair, LowSpectrum,
    ANTISYMMETRY_TOL, EDGE_SEPARATION_TOL, LOW_LEVEL_TOL,
};

use crate::qcore::QcoreError;

#[derive(Debug, Error)]
pub enum NanowireError {
    #[error("invalid nanowire parameters: {0}")]
    InvalidParams(String),
    #[error("invalid disorder specification: {0}")]
    InvalidDisorder(String),
    #[error("particle-hole symmetry broken: max |ΣHΣ⁻¹ + H| = {0:.3e}")]
    SymmetryBroken(f64),
    #[error("spectrum not antisymmetric: max |ε + ε'| = {0:.3e} meV")]
    Antisymmetry(f64),
    #[error("edge sector ill-separated: ε1 = {epsilon_1:.3e}, ε2 = {epsilon_2:.3e} meV")]
    IllSeparated { epsilon_1: f64, epsilon_2: f64 },
    #[error("envelope fit refused: {0}")]
    FitRefused(String),
    #[error(transparent)]
    Core(#[from] QcoreError),
}
