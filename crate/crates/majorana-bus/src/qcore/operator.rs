use std::ops::{Add, Mul, Neg, Sub};

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::{HilbertSpace, QcoreError, C64};

/// Largest total dimension `tensor` will build unless told otherwise.
pub const DEFAULT_DIM_CAP: usize = 1 << 14;

/// Energy scale an operator's entries are expressed in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyUnit {
    /// ħ = 1, angular frequency in rad/ns (2π×GHz).
    AngularGhz,
    /// meV, used by the nanowire model.
    MilliElectronVolt,
    #[default]
    Dimensionless,
}

/// Dense complex operator on a composite Hilbert space.
#[derive(Clone, Debug)]
pub struct Operator {
    space: HilbertSpace,
    mat: Mat<C64>,
    unit: EnergyUnit,
}

impl Operator {
    pub fn new(space: HilbertSpace, mat: Mat<C64>, unit: EnergyUnit) -> Result<Self, QcoreError> {
        let d = space.total_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(QcoreError::DimensionMismatch {
                expected: d,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Self { space, mat, unit })
    }

    /// Wraps a square matrix as an operator on a single flat factor.
    ///
    /// # Panics
    /// If `mat` is not square.
    pub fn from_matrix(mat: Mat<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator matrix must be square");
        Self {
            space: HilbertSpace::flat(mat.nrows()),
            mat,
            unit: EnergyUnit::Dimensionless,
        }
    }

    /// Builds an operator from a row-major nested array.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        Self::from_matrix(Mat::from_fn(N, N, |i, j| rows[i][j]))
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            mat: Mat::identity(d, d),
            unit: EnergyUnit::Dimensionless,
        }
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            mat: Mat::zeros(d, d),
            unit: EnergyUnit::Dimensionless,
        }
    }

    pub fn with_unit(mut self, unit: EnergyUnit) -> Self {
        self.unit = unit;
        self
    }

    /// Reinterprets the tensor structure; total dimension must agree.
    pub fn with_space(mut self, space: HilbertSpace) -> Result<Self, QcoreError> {
        if space.total_dim() != self.dim() {
            return Err(QcoreError::DimensionMismatch {
                expected: self.dim(),
                found: space.total_dim(),
            });
        }
        self.space = space;
        Ok(self)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn unit(&self) -> EnergyUnit {
        self.unit
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Mat<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            mat: self.mat.adjoint().to_owned(),
            unit: self.unit,
        }
    }

    /// max |H_ij − conj(H_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..d {
            for i in j..d {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() < tol
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// max |entry|.
    pub fn norm_max(&self) -> f64 {
        self.mat.norm_max()
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.mat.norm_l2()
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator {
            space: self.space.clone(),
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * c),
            unit: self.unit,
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim(), "vector length");
        let d = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); d];
        for (j, &vj) in v.iter().enumerate() {
            if vj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.mat.col(j);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col[i] * vj;
            }
        }
        out
    }

    /// ⟨v|A|v⟩.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let av = self.apply(v);
        v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    fn check_same(&self, other: &Operator) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "operator dimension mismatch ({} vs {})",
            self.dim(),
            other.dim()
        );
    }

    fn merged_unit(&self, other: &Operator) -> EnergyUnit {
        match self.unit {
            EnergyUnit::Dimensionless => other.unit,
            u => u,
        }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator {
            space: self.space.clone(),
            mat: &self.mat + &rhs.mat,
            unit: self.merged_unit(rhs),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator {
            space: self.space.clone(),
            mat: &self.mat - &rhs.mat,
            unit: self.merged_unit(rhs),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator {
            space: self.space.clone(),
            mat: &self.mat * &rhs.mat,
            unit: self.merged_unit(rhs),
        }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Kronecker product with factor order preserved.
pub fn tensor(ops: &[&Operator]) -> Result<Operator, QcoreError> {
    tensor_with_cap(ops, DEFAULT_DIM_CAP)
}

/// As [`tensor`], refusing results with total dimension above `cap`.
pub fn tensor_with_cap(ops: &[&Operator], cap: usize) -> Result<Operator, QcoreError> {
    let (first, rest) = ops.split_first().ok_or(QcoreError::EmptyTensor)?;
    let total: usize = ops.iter().map(|o| o.dim()).product();
    if total > cap {
        return Err(QcoreError::DimensionCap { dim: total, cap });
    }
    let mut acc = (*first).clone();
    for op in rest {
        acc = Operator {
            space: acc.space.product(&op.space),
            mat: acc.mat.kron(&op.mat),
            unit: acc.merged_unit(op),
        };
    }
    Ok(acc)
}

/// Places a single-factor operator at `position` of `space`, identity elsewhere.
pub fn embed(op: &Operator, position: usize, space: &HilbertSpace) -> Result<Operator, QcoreError> {
    let dims = space.factor_dims();
    if position >= dims.len() {
        return Err(QcoreError::IndexOutOfRange {
            index: position,
            len: dims.len(),
        });
    }
    if dims[position] != op.dim() {
        return Err(QcoreError::DimensionMismatch {
            expected: dims[position],
            found: op.dim(),
        });
    }
    let d = space.total_dim();
    let strides = space.strides();
    let stride = strides[position];
    let n = dims[position];
    let mut mat = Mat::<C64>::zeros(d, d);
    for col in 0..d {
        let digit = (col / stride) % n;
        let base = col - digit * stride;
        for k in 0..n {
            let v = op.mat[(k, digit)];
            if v != C64::new(0.0, 0.0) {
                mat[(base + k * stride, col)] = v;
            }
        }
    }
    Operator::new(space.clone(), mat, op.unit)
}

/// Standard single-factor operators.
///
/// Qubit basis is `(|0⟩, |1⟩)` with `|1⟩` the excited level, so
/// `σz = diag(−1, +1)`, `σ+ = |1⟩⟨0|`, `σ− = |0⟩⟨1|`.
pub mod ops {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub fn identity(n: usize) -> Operator {
        Operator::identity(HilbertSpace::flat(n))
    }

    pub fn sigma_x() -> Operator {
        Operator::from_rows([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]])
    }

    /// Chosen so that `[σx, σy] = 2iσz` with the flipped `σz` above.
    pub fn sigma_y() -> Operator {
        Operator::from_rows([[c(0., 0.), c(0., 1.)], [c(0., -1.), c(0., 0.)]])
    }

    pub fn sigma_z() -> Operator {
        Operator::from_rows([[c(-1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]])
    }

    pub fn sigma_plus() -> Operator {
        Operator::from_rows([[c(0., 0.), c(0., 0.)], [c(1., 0.), c(0., 0.)]])
    }

    pub fn sigma_minus() -> Operator {
        Operator::from_rows([[c(0., 0.), c(1., 0.)], [c(0., 0.), c(0., 0.)]])
    }

    /// Truncated annihilation operator on `n` Fock levels.
    pub fn destroy(n: usize) -> Operator {
        let mut m = Mat::<C64>::zeros(n, n);
        for k in 1..n {
            m[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
        }
        Operator::from_matrix(m)
    }

    pub fn number(n: usize) -> Operator {
        let mut m = Mat::<C64>::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = c(k as f64, 0.0);
        }
        Operator::from_matrix(m)
    }

    /// `|i⟩⟨j|` on an `n`-level factor.
    pub fn projector(n: usize, i: usize, j: usize) -> Operator {
        let mut m = Mat::<C64>::zeros(n, n);
        m[(i, j)] = c(1.0, 0.0);
        Operator::from_matrix(m)
    }
}
