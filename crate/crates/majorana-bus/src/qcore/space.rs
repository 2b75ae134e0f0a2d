use serde::{Deserialize, Serialize};

use super::QcoreError;

/// Ordered tensor-product structure, e.g. `[2, 2, n_fock]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    factor_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self, QcoreError> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(QcoreError::InvalidSpace(factor_dims));
        }
        Ok(Self { factor_dims })
    }

    /// A single unstructured factor of dimension `dim`.
    pub fn flat(dim: usize) -> Self {
        Self::new(vec![dim]).expect("flat space needs dim >= 1")
    }

    /// `n` qubits followed by one bosonic mode truncated at `n_fock` levels.
    pub fn qubits_and_mode(n: usize, n_fock: usize) -> Self {
        let mut dims = vec![2; n];
        dims.push(n_fock);
        Self::new(dims).expect("qubit/mode dims are positive")
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn n_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Concatenation of factor lists (the space of `self ⊗ other`).
    pub fn product(&self, other: &HilbertSpace) -> HilbertSpace {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        HilbertSpace { factor_dims: dims }
    }

    /// Row-major strides of each factor.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factor_dims.len()];
        for k in (0..self.factor_dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factor_dims[k + 1];
        }
        strides
    }

    /// Flat index of a multi-index.
    pub fn index_of(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.factor_dims.len(), "multi-index length");
        digits
            .iter()
            .zip(&self.factor_dims)
            .fold(0, |acc, (&d, &n)| {
                assert!(d < n, "digit {d} out of range for factor of dim {n}");
                acc * n + d
            })
    }

    /// Multi-index of a flat index.
    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factor_dims.len()];
        for k in (0..self.factor_dims.len()).rev() {
            digits[k] = index % self.factor_dims[k];
            index /= self.factor_dims[k];
        }
        digits
    }
}
