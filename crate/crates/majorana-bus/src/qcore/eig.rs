use faer::{Mat, Side};

use super::{Operator, QcoreError, C64};

/// Largest tolerated `max |H − H†|` before a matrix is refused as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Eigendecomposition `H = V Λ V†` with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: Mat<C64>,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let col = self.vectors.col(k);
        (0..col.nrows()).map(|i| col[i]).collect()
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Mat<C64> {
        let d = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = Mat::from_fn(d, d, |i, j| self.vectors[(i, j)] * fv[j]);
        &scaled * self.vectors.adjoint()
    }
}

fn imag_free(m: &Mat<C64>) -> bool {
    let d = m.nrows();
    (0..d).all(|j| (0..d).all(|i| m[(i, j)].im == 0.0))
}

/// Hermitian eigensolver for raw matrices; see [`eig_hermitian`].
pub fn eig_hermitian_matrix(m: &Mat<C64>) -> Result<Eigh, QcoreError> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(QcoreError::DimensionMismatch {
            expected: d,
            found: m.ncols(),
        });
    }
    let mut defect = 0.0_f64;
    for j in 0..d {
        for i in j..d {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if defect >= HERMITIAN_TOL {
        return Err(QcoreError::NonHermitian { defect });
    }
    if imag_free(m) {
        let re = Mat::<f64>::from_fn(d, d, |i, j| m[(i, j)].re);
        let evd = re
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| QcoreError::EigenFailure(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        return Ok(Eigh {
            values: (0..d).map(|k| s[k]).collect(),
            vectors: Mat::from_fn(d, d, |i, j| C64::new(u[(i, j)], 0.0)),
        });
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| QcoreError::EigenFailure(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    Ok(Eigh {
        values: (0..d).map(|k| s[k].re).collect(),
        vectors: evd.U().to_owned(),
    })
}

/// Eigenvalues ascending and orthonormal eigenvectors of a Hermitian operator.
///
/// Real-symmetric input takes a real-arithmetic path.
pub fn eig_hermitian(op: &Operator) -> Result<Eigh, QcoreError> {
    eig_hermitian_matrix(op.matrix())
}

/// Eigenvalues only.
pub fn eigvals_hermitian(op: &Operator) -> Result<Vec<f64>, QcoreError> {
    let m = op.matrix();
    let d = m.nrows();
    let defect = op.hermiticity_defect();
    if defect >= HERMITIAN_TOL {
        return Err(QcoreError::NonHermitian { defect });
    }
    let vals = if imag_free(m) {
        Mat::<f64>::from_fn(d, d, |i, j| m[(i, j)].re)
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| QcoreError::EigenFailure(format!("{e:?}")))?
    } else {
        m.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| QcoreError::EigenFailure(format!("{e:?}")))?
    };
    Ok(vals)
}
