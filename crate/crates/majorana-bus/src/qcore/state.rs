use faer::Mat;

use super::{eig_hermitian_matrix, HilbertSpace, Operator, QcoreError, C64};

pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-9;
pub const STATE_POSITIVITY_TOL: f64 = 1e-9;

/// Density matrix on a composite space.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: HilbertSpace,
    mat: Mat<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(space: HilbertSpace, mat: Mat<C64>) -> Result<Self, QcoreError> {
        let rho = Self::from_parts_unchecked(space, mat)?;
        rho.validate(STATE_HERMITIAN_TOL, STATE_TRACE_TOL, STATE_POSITIVITY_TOL)?;
        Ok(rho)
    }

    /// Checks dimensions only. Integrators use this and validate at sample times.
    pub fn from_parts_unchecked(space: HilbertSpace, mat: Mat<C64>) -> Result<Self, QcoreError> {
        let d = space.total_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(QcoreError::DimensionMismatch {
                expected: d,
                found: mat.nrows(),
            });
        }
        Ok(Self { space, mat })
    }

    /// `|ψ⟩⟨ψ|` for a normalized ψ.
    pub fn pure(space: HilbertSpace, psi: &[C64]) -> Result<Self, QcoreError> {
        let d = space.total_dim();
        if psi.len() != d {
            return Err(QcoreError::DimensionMismatch {
                expected: d,
                found: psi.len(),
            });
        }
        let mat = Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj());
        Self::new(space, mat)
    }

    /// `ρ_A ⊗ ρ_B`.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            space: a.space.product(&b.space),
            mat: a.mat.kron(&b.mat),
        }
    }

    pub fn validate(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<(), QcoreError> {
        let d = self.dim();
        let mut defect = 0.0_f64;
        for j in 0..d {
            for i in j..d {
                defect = defect.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        if defect > herm_tol {
            return Err(QcoreError::InvalidState(format!(
                "not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > trace_tol {
            return Err(QcoreError::InvalidState(format!("trace {tr:.12} differs from 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -pos_tol {
            return Err(QcoreError::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
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

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for j in 0..d {
            for i in 0..d {
                s += self.mat[(i, j)].norm_sqr();
            }
        }
        s
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64, QcoreError> {
        let d = self.dim();
        let herm = Mat::from_fn(d, d, |i, j| (self.mat[(i, j)] + self.mat[(j, i)].conj()) * 0.5);
        let eig = eig_hermitian_matrix(&herm)?;
        Ok(eig.values[0])
    }

    /// `Tr(ρ A)`.
    pub fn expectation(&self, op: &Operator) -> C64 {
        let d = self.dim();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                s += self.mat[(i, k)] * op.matrix()[(k, i)];
            }
        }
        s
    }
}

/// Traces out every factor not listed in `keep`; kept factors stay in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, QcoreError> {
    let dims = rho.space().factor_dims();
    let nf = dims.len();
    for &k in keep {
        if k >= nf {
            return Err(QcoreError::IndexOutOfRange { index: k, len: nf });
        }
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() {
        return Err(QcoreError::InvalidArgument("keep list is empty".into()));
    }
    let traced: Vec<usize> = (0..nf).filter(|k| !kept.contains(k)).collect();
    let kept_space = HilbertSpace::new(kept.iter().map(|&k| dims[k]).collect())?;
    let d_keep = kept_space.total_dim();
    let d_trace: usize = traced.iter().map(|&k| dims[k]).product();

    // groups[t][a] = full index with traced digits t and kept digits a
    let mut groups = vec![vec![0usize; d_keep]; d_trace];
    for full in 0..rho.dim() {
        let digits = rho.space().digits_of(full);
        let a = kept.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
        let t = traced.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
        groups[t][a] = full;
    }
    let m = rho.matrix();
    let mut out = Mat::<C64>::zeros(d_keep, d_keep);
    for g in &groups {
        for (b, &jb) in g.iter().enumerate() {
            for (a, &ia) in g.iter().enumerate() {
                out[(a, b)] += m[(ia, jb)];
            }
        }
    }
    DensityMatrix::from_parts_unchecked(kept_space, out)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(rho: &DensityMatrix, psi: &[C64]) -> Result<f64, QcoreError> {
    let d = rho.dim();
    if psi.len() != d {
        return Err(QcoreError::DimensionMismatch {
            expected: d,
            found: psi.len(),
        });
    }
    let m = rho.matrix();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..d {
        if psi[j] == C64::new(0.0, 0.0) {
            continue;
        }
        let mut col = C64::new(0.0, 0.0);
        for i in 0..d {
            col += psi[i].conj() * m[(i, j)];
        }
        s += col * psi[j];
    }
    Ok(s.re)
}

/// `|⟨a|b⟩|²`.
pub fn state_fidelity(a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).norm_sqr()
}

/// `⟨a|b⟩`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(a: &mut [C64]) {
    let n = norm(a);
    if n > 0.0 {
        for x in a.iter_mut() {
            *x /= n;
        }
    }
}

/// Computational basis ket with the given digit per factor.
pub fn basis_ket(space: &HilbertSpace, digits: &[usize]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); space.total_dim()];
    v[space.index_of(digits)] = C64::new(1.0, 0.0);
    v
}

/// Kronecker product of two kets.
pub fn ket_product(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// `max |e^{iφ} a − b|` with φ fixed by the largest-magnitude entry of `a`.
pub fn phase_gauged_distance(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()), "shape mismatch");
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)].norm();
            if v > best {
                best = v;
                bi = i;
                bj = j;
            }
        }
    }
    let phase = if best > 0.0 && b[(bi, bj)].norm() > 0.0 {
        let r = b[(bi, bj)] / a[(bi, bj)];
        r / r.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let mut worst = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] * phase - b[(i, j)]).norm());
        }
    }
    worst
}
