//! Dense complex operators on composite Hilbert spaces, Hermitian
//! eigendecomposition, time-ordered propagation, partial trace and fidelity.

mod eig;
mod expm;
mod operator;
mod propagate;
mod space;
mod state;

use thiserror::Error;

pub use eig::{eig_hermitian, eig_hermitian_matrix, eigvals_hermitian, Eigh, HERMITIAN_TOL};
pub use expm::{exp_hermitian, expm};
pub use operator::{embed, ops, tensor, tensor_with_cap, EnergyUnit, Operator, DEFAULT_DIM_CAP};
pub use propagate::{propagate, propagate_state, StepPolicy};
pub use space::HilbertSpace;
pub use state::{
    basis_ket, fidelity, inner, ket_product, norm, normalize, partial_trace, phase_gauged_distance,
    state_fidelity, DensityMatrix,
};

pub type C64 = num_complex::Complex64;

#[derive(Debug, Error)]
pub enum QcoreError {
    #[error("invalid factor dimensions {0:?}")]
    InvalidSpace(Vec<usize>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tensor product of dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("tensor product of an empty operator list")]
    EmptyTensor,
    #[error("factor index {index} out of range for {len} factors")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("matrix is not Hermitian: max |H - H^dagger| = {defect:.3e}")]
    NonHermitian { defect: f64 },
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("step policy violated: phase per step {phase:.3e} exceeds {threshold:.3e}")]
    StepPolicy { phase: f64, threshold: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("{0}")]
    InvalidArgument(String),
}
