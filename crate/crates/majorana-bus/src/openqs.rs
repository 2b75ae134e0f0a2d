//! Lindblad dynamics of qubits coupled to one cavity mode, and the
//! single-qubit transfer experiments.
//!
//! The master equation is
//! `dρ/dt = −i[H,ρ] + (κ/2)[(n_c+1)𝓛(a) + n_c𝓛(a†)] + (1/2)Σ_j[Γ1𝓛(σ⁻_j) + Γ2𝓛(σᶻ_j)]`
//! with `𝓛(A)ρ = 2AρA† − A†Aρ − ρA†A`.

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::qcore::{
    ops, tensor, DensityMatrix, EnergyUnit, HilbertSpace, Operator, QcoreError, C64,
};
use crate::units::bose_occupation;

#[derive(Debug, Error)]
pub enum OpenQsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid Lindblad spec: {0}")]
    InvalidSpec(String),
    #[error(
        "state invariant violated at t = {time}: trace drift {trace_drift:.3e}, \
         hermiticity {hermiticity:.3e} (dt = {dt:.3e}; reduce the step)"
    )]
    Invariant {
        time: f64,
        trace_drift: f64,
        hermiticity: f64,
        dt: f64,
    },
    #[error(transparent)]
    Core(#[from] QcoreError),
}

const ZERO: C64 = C64::new(0.0, 0.0);

/// Square complex matrix in column-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn from_mat(m: &Mat<C64>) -> Self {
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                data.push(m[(i, j)]);
            }
        }
        Self { n, data }
    }

    pub fn to_mat(&self) -> Mat<C64> {
        Mat::from_fn(self.n, self.n, |i, j| self[(i, j)])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// `max |A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d = 0.0_f64;
        for j in 0..self.n {
            for i in 0..=j {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|x| *x = ZERO);
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: f64, other: &CMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    /// `self += X + X†`.
    pub fn add_hermitian_part(&mut self, x: &CMatrix) {
        let n = self.n;
        for j in 0..n {
            for i in 0..n {
                self.data[j * n + i] += x.data[j * n + i] + x.data[i * n + j].conj();
            }
        }
    }

    /// Column-major copy of the adjoint.
    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for j in 0..n {
            for i in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub(crate) fn data(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn expectation(&self, psi: &[C64]) -> C64 {
        let mut acc = ZERO;
        for j in 0..self.n {
            let mut col = ZERO;
            for i in 0..self.n {
                col += psi[i].conj() * self.data[j * self.n + i];
            }
            acc += col * psi[j];
        }
        acc
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[j * self.n + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[j * self.n + i]
    }
}

const PAR_MIN_DIM: usize = 96;

/// Sparse square operator in compressed-row form.
#[derive(Clone, Debug)]
pub struct SparseOp {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn from_dense(m: &Mat<C64>) -> Self {
        let n = m.nrows();
        let mut e = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if m[(i, j)] != ZERO {
                    e.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, e)
    }

    pub fn from_operator(op: &Operator) -> Self {
        Self::from_dense(op.matrix())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub(crate) fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn adjoint(&self) -> SparseOp {
        Self::from_triplets(self.n, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scale(&self, s: C64) -> SparseOp {
        Self { vals: self.vals.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &SparseOp) -> SparseOp {
        Self::from_triplets(self.n, self.triplets().chain(other.triplets()).collect())
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &SparseOp) -> SparseOp {
        let mut e = Vec::new();
        for (r, k, v) in self.triplets() {
            for q in other.row_ptr[k]..other.row_ptr[k + 1] {
                e.push((r, other.cols[q], v * other.vals[q]));
            }
        }
        let mut s = Self::from_triplets(self.n, e);
        s.prune();
        s
    }

    fn prune(&mut self) {
        let kept: Vec<_> = self.triplets().filter(|t| t.2.norm() > 0.0).collect();
        *self = Self::from_triplets(self.n, kept);
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn row_sum_bound(&self) -> f64 {
        (0..self.n)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::zeros(self.n, self.n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    fn apply_col(&self, c: C64, x: &[C64], out: &mut [C64]) {
        for r in 0..self.n {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            out[r] += c * acc;
        }
    }

    /// `out += self · x · self†`.
    pub fn sandwich(&self, x: &CMatrix, out: &mut CMatrix) {
        let n = self.n;
        let col = |rp: usize, o: &mut [C64]| {
            for kp in self.row_ptr[rp]..self.row_ptr[rp + 1] {
                let (cp, vp) = (self.cols[kp], self.vals[kp].conj());
                let xc = &x.data[cp * n..(cp + 1) * n];
                for r in 0..n {
                    for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                        o[r] += self.vals[k] * xc[self.cols[k]] * vp;
                    }
                }
            }
        };
        if n >= PAR_MIN_DIM {
            out.data.par_chunks_mut(n).enumerate().for_each(|(rp, o)| col(rp, o));
        } else {
            out.data.chunks_mut(n).enumerate().for_each(|(rp, o)| col(rp, o));
        }
    }

    /// `out += c · self · x`.
    pub fn apply_left(&self, c: C64, x: &CMatrix, out: &mut CMatrix) {
        let n = self.n;
        if n >= PAR_MIN_DIM {
            out.data
                .par_chunks_mut(n)
                .zip(x.data.par_chunks(n))
                .for_each(|(o, xc)| self.apply_col(c, xc, o));
        } else {
            for (o, xc) in out.data.chunks_mut(n).zip(x.data.chunks(n)) {
                self.apply_col(c, xc, o);
            }
        }
    }
}

/// Time dependence of one Hamiltonian term: `amplitude · e^{−i·frequency·t}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Coefficient {
    pub amplitude: C64,
    pub frequency: f64,
}

impl Coefficient {
    pub fn constant(a: f64) -> Self {
        Self { amplitude: C64::new(a, 0.0), frequency: 0.0 }
    }

    pub fn at(&self, t: f64) -> C64 {
        if self.frequency == 0.0 {
            self.amplitude
        } else {
            self.amplitude * C64::from_polar(1.0, -self.frequency * t)
        }
    }
}

/// `H(t) = Σ_k c_k(t) S_k`; the caller supplies Hermitian-conjugate pairs.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub terms: Vec<(SparseOp, Coefficient)>,
    pub space: HilbertSpace,
}

impl Hamiltonian {
    pub fn from_operator(op: &Operator) -> Self {
        Self {
            terms: vec![(SparseOp::from_operator(op), Coefficient::constant(1.0))],
            space: op.space().clone(),
        }
    }

    pub fn zero(space: HilbertSpace) -> Self {
        Self { terms: Vec::new(), space }
    }

    pub fn with_term(mut self, op: &Operator, coeff: Coefficient) -> Self {
        self.terms.push((SparseOp::from_operator(op), coeff));
        self
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn at(&self, t: f64) -> Operator {
        let d = self.dim();
        let mut m = Mat::<C64>::zeros(d, d);
        for (s, c) in &self.terms {
            let ct = c.at(t);
            for (r, col, v) in s.triplets() {
                m[(r, col)] += ct * v;
            }
        }
        Operator::new(self.space.clone(), m, EnergyUnit::AngularGhz).expect("dims agree")
    }

    /// Largest explicit frequency among the terms.
    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.frequency.abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, PartialEq)]
pub struct Rates {
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Rates {
    pub fn uniform(r: f64) -> Self {
        Self { kappa: r, gamma1: r, gamma2: r }
    }
}

/// Qubits followed by one cavity mode, with the dissipator above.
#[derive(Clone, Debug)]
pub struct LindbladSpec {
    pub hamiltonian: Hamiltonian,
    pub rates: Rates,
    pub n_c: f64,
    pub space: HilbertSpace,
    /// Frequencies that set the RK4 step `dt ≤ 0.01/max(ω_scales)`.
    pub omega_scales: Vec<f64>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: Hamiltonian, rates: Rates, n_c: f64, omega_scales: Vec<f64>) -> Result<Self, OpenQsError> {
        let space = hamiltonian.space.clone();
        let spec = Self { hamiltonian, rates, n_c, space, omega_scales };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), OpenQsError> {
        let r = self.rates;
        for (name, v) in [("kappa", r.kappa), ("gamma1", r.gamma1), ("gamma2", r.gamma2), ("n_c", self.n_c)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(OpenQsError::InvalidSpec(format!("{name} = {v} must be finite and ≥ 0")));
            }
        }
        let dims = self.space.factor_dims();
        if dims.len() < 2 || dims[..dims.len() - 1].iter().any(|&d| d != 2) {
            return Err(OpenQsError::InvalidSpec(format!(
                "space must be qubits ⊗ mode, got factors {dims:?}"
            )));
        }
        if self.hamiltonian.dim() != self.space.total_dim() {
            return Err(OpenQsError::Dimension {
                expected: self.space.total_dim(),
                found: self.hamiltonian.dim(),
            });
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.space.n_factors() - 1
    }

    pub fn n_fock(&self) -> usize {
        *self.space.factor_dims().last().expect("validated")
    }

    /// Jump operators `L` of the standard form `LρL† − ½{L†L, ρ}`.
    pub fn jump_operators(&self) -> Vec<SparseOp> {
        let n = self.n_qubits();
        let nf = self.n_fock();
        let r = self.rates;
        let mut out = Vec::new();
        let cav = |op: &Operator| {
            let mut factors: Vec<Operator> = (0..n).map(|_| ops::identity(2)).collect();
            factors.push(op.clone());
            let refs: Vec<&Operator> = factors.iter().collect();
            SparseOp::from_operator(&tensor(&refs).expect("within cap"))
        };
        let qub = |j: usize, op: &Operator| {
            let mut factors: Vec<Operator> = (0..n).map(|_| ops::identity(2)).collect();
            factors[j] = op.clone();
            factors.push(ops::identity(nf));
            let refs: Vec<&Operator> = factors.iter().collect();
            SparseOp::from_operator(&tensor(&refs).expect("within cap"))
        };
        let a = ops::destroy(nf);
        if r.kappa * (self.n_c + 1.0) > 0.0 {
            out.push(cav(&a).scale(C64::new((r.kappa * (self.n_c + 1.0)).sqrt(), 0.0)));
        }
        if r.kappa * self.n_c > 0.0 {
            out.push(cav(&a.adjoint()).scale(C64::new((r.kappa * self.n_c).sqrt(), 0.0)));
        }
        for j in 0..n {
            if r.gamma1 > 0.0 {
                out.push(qub(j, &ops::sigma_minus()).scale(C64::new(r.gamma1.sqrt(), 0.0)));
            }
            if r.gamma2 > 0.0 {
                out.push(qub(j, &ops::sigma_z()).scale(C64::new(r.gamma2.sqrt(), 0.0)));
            }
        }
        out
    }

    /// `dt_max = 0.01/max(ω_scales)`.
    pub fn dt_max(&self) -> f64 {
        let w = self.omega_scales.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
        if w > 0.0 {
            0.01 / w
        } else {
            f64::INFINITY
        }
    }
}

/// Right-hand side of a linear master equation on block-diagonal states.
pub trait Generator: Sync {
    fn rhs(&self, t: f64, state: &[CMatrix], out: &mut [CMatrix]);
    /// Physical trace of a block state.
    fn trace(&self, state: &[CMatrix]) -> C64;
}

/// Full-space Lindblad generator.
pub struct LindbladGenerator {
    terms: Vec<(SparseOp, Coefficient)>,
    decay: SparseOp,
    jumps: Vec<SparseOp>,
    scratch_dim: usize,
}

impl LindbladGenerator {
    pub fn new(spec: &LindbladSpec) -> Self {
        let d = spec.space.total_dim();
        let jumps = spec.jump_operators();
        let mut decay = SparseOp::from_triplets(d, Vec::new());
        for l in &jumps {
            decay = decay.add(&l.adjoint().matmul(l));
        }
        Self {
            terms: spec.hamiltonian.terms.clone(),
            decay: decay.scale(C64::new(-0.5, 0.0)),
            jumps,
            scratch_dim: d,
        }
    }
}

impl Generator for LindbladGenerator {
    fn rhs(&self, t: f64, state: &[CMatrix], out: &mut [CMatrix]) {
        let rho = &state[0];
        let o = &mut out[0];
        o.fill_zero();
        // X = (−iH − ½K)ρ; the commutator and anticommutator are X + X†.
        let mut x = CMatrix::zeros(self.scratch_dim);
        for (s, c) in &self.terms {
            s.apply_left(C64::new(0.0, -1.0) * c.at(t), rho, &mut x);
        }
        self.decay.apply_left(C64::new(1.0, 0.0), rho, &mut x);
        o.add_hermitian_part(&x);
        for l in &self.jumps {
            l.sandwich(rho, o);
        }
    }

    fn trace(&self, state: &[CMatrix]) -> C64 {
        state[0].trace()
    }
}

/// `dρ/dt` at time `t`.
pub fn lindblad_rhs(rho: &DensityMatrix, spec: &LindbladSpec, t: f64) -> Result<Mat<C64>, OpenQsError> {
    if rho.dim() != spec.space.total_dim() {
        return Err(OpenQsError::Dimension { expected: spec.space.total_dim(), found: rho.dim() });
    }
    let gen = LindbladGenerator::new(spec);
    let state = [CMatrix::from_mat(rho.matrix())];
    let mut out = [CMatrix::zeros(rho.dim())];
    gen.rhs(t, &state, &mut out);
    Ok(out[0].to_mat())
}

fn rk4_step<G: Generator>(gen: &G, t: f64, dt: f64, y: &mut [CMatrix], k: &mut [Vec<CMatrix>; 4], tmp: &mut [CMatrix]) {
    gen.rhs(t, y, &mut k[0]);
    for (tb, (yb, kb)) in tmp.iter_mut().zip(y.iter().zip(&k[0])) {
        tb.clone_from(yb);
        tb.axpy(0.5 * dt, kb);
    }
    gen.rhs(t + 0.5 * dt, tmp, &mut k[1]);
    for (tb, (yb, kb)) in tmp.iter_mut().zip(y.iter().zip(&k[1])) {
        tb.clone_from(yb);
        tb.axpy(0.5 * dt, kb);
    }
    gen.rhs(t + 0.5 * dt, tmp, &mut k[2]);
    for (tb, (yb, kb)) in tmp.iter_mut().zip(y.iter().zip(&k[2])) {
        tb.clone_from(yb);
        tb.axpy(dt, kb);
    }
    gen.rhs(t + dt, tmp, &mut k[3]);
    for (b, yb) in y.iter_mut().enumerate() {
        yb.axpy(dt / 6.0, &k[0][b]);
        yb.axpy(dt / 3.0, &k[1][b]);
        yb.axpy(dt / 3.0, &k[2][b]);
        yb.axpy(dt / 6.0, &k[3][b]);
    }
}

/// Trace drift tolerated by [`integrate`].
pub const TRACE_DRIFT_TOL: f64 = 1e-7;

/// Fixed-step RK4 from `t0`, calling `observe(index, t, state)` at each sample time.
///
/// Each interval between samples is split into equal steps no longer than `dt_max`.
pub fn integrate<G, F>(
    gen: &G,
    state: &mut [CMatrix],
    t0: f64,
    times: &[f64],
    dt_max: f64,
    mut observe: F,
) -> Result<IntegrationStats, OpenQsError>
where
    G: Generator,
    F: FnMut(usize, f64, &[CMatrix]) -> Result<(), OpenQsError>,
{
    let shape: Vec<usize> = state.iter().map(|b| b.dim()).collect();
    let fresh = || shape.iter().map(|&n| CMatrix::zeros(n)).collect::<Vec<_>>();
    let mut k = [fresh(), fresh(), fresh(), fresh()];
    let mut tmp = fresh();
    let tr0 = gen.trace(state).re;
    let mut t = t0;
    let mut stats = IntegrationStats { steps: 0, dt_used: 0.0, max_trace_drift: 0.0, max_hermiticity: 0.0 };
    for (idx, &ts) in times.iter().enumerate() {
        if ts < t {
            return Err(OpenQsError::InvalidSpec(format!("sample times must be non-decreasing ({ts} < {t})")));
        }
        let span = ts - t;
        let n = if span > 0.0 { (span / dt_max).ceil().max(1.0) as usize } else { 0 };
        let dt = if n > 0 { span / n as f64 } else { 0.0 };
        for s in 0..n {
            rk4_step(gen, t + s as f64 * dt, dt, state, &mut k, &mut tmp);
        }
        stats.steps += n;
        stats.dt_used = stats.dt_used.max(dt);
        t = ts;
        let drift = (gen.trace(state) - tr0).norm();
        let herm = state.iter().map(|b| b.hermiticity_defect()).fold(0.0, f64::max);
        stats.max_trace_drift = stats.max_trace_drift.max(drift);
        stats.max_hermiticity = stats.max_hermiticity.max(herm);
        if drift > TRACE_DRIFT_TOL || herm > TRACE_DRIFT_TOL || !drift.is_finite() {
            return Err(OpenQsError::Invariant { time: t, trace_drift: drift, hermiticity: herm, dt });
        }
        observe(idx, t, state)?;
    }
    Ok(stats)
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct IntegrationStats {
    pub steps: usize,
    pub dt_used: f64,
    pub max_trace_drift: f64,
    pub max_hermiticity: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub stats: IntegrationStats,
}

/// Integrates from `t = 0` and returns the state at each of `t_grid`.
pub fn evolve(rho0: &DensityMatrix, spec: &LindbladSpec, t_grid: &[f64]) -> Result<Trajectory, OpenQsError> {
    spec.validate()?;
    if rho0.dim() != spec.space.total_dim() {
        return Err(OpenQsError::Dimension { expected: spec.space.total_dim(), found: rho0.dim() });
    }
    let gen = LindbladGenerator::new(spec);
    let mut state = vec![CMatrix::from_mat(rho0.matrix())];
    let mut states = Vec::with_capacity(t_grid.len());
    let stats = integrate(&gen, &mut state, 0.0, t_grid, spec.dt_max(), |_, _, s| {
        states.push(DensityMatrix::from_parts_unchecked(spec.space.clone(), s[0].to_mat())?);
        Ok(())
    })?;
    Ok(Trajectory { times: t_grid.to_vec(), states, stats })
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub max: f64,
    pub argmax: f64,
}

impl FidelityTrace {
    pub fn new(times: Vec<f64>, fidelities: Vec<f64>) -> Self {
        let (mut max, mut argmax) = (f64::NEG_INFINITY, f64::NAN);
        for (&t, &f) in times.iter().zip(&fidelities) {
            if f > max {
                max = f;
                argmax = t;
            }
        }
        Self { times, fidelities, max, argmax }
    }

    pub fn at(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|i| self.fidelities[i])
    }
}

/// Initial cavity state for the transfer runs.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub enum CavityInit {
    Vacuum,
    /// `(1 − n)|0⟩⟨0| + n|1⟩⟨1|`.
    TwoLevelThermal(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferConfig {
    pub g: f64,
    pub rates: Rates,
    pub n_c: f64,
    pub cavity_init: CavityInit,
    pub t_max: f64,
    pub n_fock: usize,
    pub samples: usize,
}

impl TransferConfig {
    /// `κ = Γ1 = Γ2 = g/1000`, `n_c = 0`, `t ∈ [0, π/g]`, five Fock levels.
    pub fn operating_point(g: f64) -> Self {
        Self {
            g,
            rates: Rates::uniform(g / 1000.0),
            n_c: 0.0,
            cavity_init: CavityInit::Vacuum,
            t_max: PI / g,
            n_fock: 5,
            samples: 200,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferResult {
    /// `⟨ψ_f|ρ|ψ_f⟩` with `ψ_f = |0⟩_t ⊗ (|0⟩_c − i|1⟩_c)/√2`.
    pub joint: FidelityTrace,
    /// `⟨0|ρ_t|0⟩` of the qubit-reduced state.
    pub reduced: FidelityTrace,
    pub f1_joint_at_transfer: f64,
    pub f1_reduced_at_transfer: f64,
    pub transfer_time: f64,
    pub stats: IntegrationStats,
    /// Largest change in either trace when `n_fock` is doubled; `None` if not run.
    pub fock_delta: Option<f64>,
    pub min_eigenvalue: f64,
}

/// Single-excitation transfer `(|0⟩+|1⟩)/√2 ⊗ ρ_c → |0⟩ ⊗ (|0⟩ − i|1⟩)/√2` under
/// `H = g(aσ⁺ + a†σ⁻)`.
pub fn transfer_experiment(cfg: &TransferConfig) -> Result<TransferResult, OpenQsError> {
    let mut r = transfer_once(cfg)?;
    let mut doubled = cfg.clone();
    doubled.n_fock *= 2;
    let r2 = transfer_once(&doubled)?;
    let delta = |a: &FidelityTrace, b: &FidelityTrace| {
        a.fidelities.iter().zip(&b.fidelities).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    r.fock_delta = Some(delta(&r.joint, &r2.joint).max(delta(&r.reduced, &r2.reduced)));
    Ok(r)
}

/// As [`transfer_experiment`] without the Fock doubling check.
pub fn transfer_once(cfg: &TransferConfig) -> Result<TransferResult, OpenQsError> {
    let nf = cfg.n_fock;
    let space = HilbertSpace::qubits_and_mode(1, nf);
    let a = ops::destroy(nf);
    let jc = &tensor(&[&ops::sigma_plus(), &a])?.scale(C64::new(cfg.g, 0.0));
    let h = jc + &jc.adjoint();
    let spec = LindbladSpec::new(Hamiltonian::from_operator(&h.with_space(space.clone())?), cfg.rates, cfg.n_c, vec![cfg.g])?;

    let s = 0.5_f64.sqrt();
    let qubit = DensityMatrix::pure(HilbertSpace::flat(2), &[C64::new(s, 0.0), C64::new(s, 0.0)])?;
    let p1 = match cfg.cavity_init {
        CavityInit::Vacuum => 0.0,
        CavityInit::TwoLevelThermal(n) => n,
    };
    let mut cav = Mat::<C64>::zeros(nf, nf);
    cav[(0, 0)] = C64::new(1.0 - p1, 0.0);
    cav[(1, 1)] = C64::new(p1, 0.0);
    let cav = DensityMatrix::new(HilbertSpace::flat(nf), cav)?;
    let rho0 = DensityMatrix::product(&qubit, &cav);

    let t_transfer = PI / (2.0 * cfg.g);
    let mut times: Vec<f64> = (0..=cfg.samples).map(|k| cfg.t_max * k as f64 / cfg.samples.max(1) as f64).collect();
    if let Err(i) = times.binary_search_by(|t| t.total_cmp(&t_transfer)) {
        if t_transfer <= cfg.t_max {
            times.insert(i, t_transfer);
        }
    }

    let mut target = vec![ZERO; 2 * nf];
    target[0] = C64::new(s, 0.0);
    target[1] = C64::new(0.0, -s);

    let gen = LindbladGenerator::new(&spec);
    let mut state = vec![CMatrix::from_mat(rho0.matrix())];
    let mut joint = Vec::with_capacity(times.len());
    let mut reduced = Vec::with_capacity(times.len());
    let mut min_eig = f64::INFINITY;
    let stats = integrate(&gen, &mut state, 0.0, &times, spec.dt_max(), |_, _, st| {
        let rho = &st[0];
        joint.push(rho.expectation(&target).re);
        reduced.push((0..nf).map(|n| rho[(n, n)].re).sum());
        let dm = DensityMatrix::from_parts_unchecked(space.clone(), rho.to_mat())?;
        min_eig = min_eig.min(dm.min_eigenvalue()?);
        Ok(())
    })?;
    let joint = FidelityTrace::new(times.clone(), joint);
    let reduced = FidelityTrace::new(times, reduced);
    Ok(TransferResult {
        f1_joint_at_transfer: joint.at(t_transfer).unwrap_or(f64::NAN),
        f1_reduced_at_transfer: reduced.at(t_transfer).unwrap_or(f64::NAN),
        transfer_time: t_transfer,
        joint,
        reduced,
        stats,
        fock_delta: None,
        min_eigenvalue: min_eig,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ThermalRow {
    pub t_mk: f64,
    pub n_c: f64,
    pub max_f1: f64,
    pub max_f1_reduced: f64,
    pub infidelity: f64,
}

/// Maximum transfer fidelity against cavity temperature.
///
/// `n_c(T)` enters both the bath and the two-level initial cavity state.
pub fn thermal_scan(
    g: f64,
    rates: Rates,
    temperatures_k: &[f64],
    omega_c: f64,
    n_fock: usize,
) -> Result<Vec<ThermalRow>, OpenQsError> {
    if let Some(t) = temperatures_k.iter().find(|&&t| !(t > 0.0)) {
        return Err(OpenQsError::InvalidSpec(format!("temperature {t} K must be positive")));
    }
    temperatures_k
        .par_iter()
        .map(|&t| {
            let n_c = bose_occupation(omega_c, t);
            let mut cfg = TransferConfig::operating_point(g);
            cfg.rates = rates;
            cfg.n_c = n_c;
            cfg.cavity_init = CavityInit::TwoLevelThermal(n_c);
            cfg.n_fock = n_fock;
            let r = transfer_once(&cfg)?;
            Ok(ThermalRow {
                t_mk: t * 1e3,
                n_c,
                max_f1: r.joint.max,
                max_f1_reduced: r.reduced.max,
                infidelity: 1.0 - r.joint.max,
            })
        })
        .collect()
}
