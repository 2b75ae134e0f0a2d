//! GHZ generation through the collective bus coupling
//! `H(t) = g(a e^{−iνt} + a† e^{iνt}) J_x`, `J_μ = Σ_j σ^μ_j / 2`.
//!
//! At `T_k = 2kπ/ν` the cavity disentangles and the qubits have acquired
//! `exp(iA(T_k)J_x²)` with `A(T_k) = 2kπg²/ν²`, which is `π/2` for `ν = 2g√k`.
//!
//! Dissipative runs use either the full `2^N · n_fock` space or, since the
//! initial state, Hamiltonian and summed local dissipators are all
//! permutation invariant, a block representation over total spin `j`.

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::openqs::{
    integrate, CMatrix, Coefficient, FidelityTrace, Generator, Hamiltonian, IntegrationStats,
    LindbladGenerator, LindbladSpec, OpenQsError, Rates, SparseOp,
};
use crate::qcore::{
    eig_hermitian_matrix, eigvals_hermitian, embed, exp_hermitian, expm, ops, propagate_state, tensor,
    EnergyUnit, HilbertSpace, Operator, QcoreError, StepPolicy, C64,
};

#[derive(Debug, Error)]
pub enum GhzError {
    #[error("invalid GHZ parameters: {0}")]
    InvalidParams(String),
    #[error("full space of dimension {dim} exceeds the cap {cap}; use the symmetric mode")]
    DimensionCap { dim: usize, cap: usize },
    #[error(transparent)]
    Core(#[from] QcoreError),
    #[error(transparent)]
    OpenQs(#[from] OpenQsError),
}

/// Largest `2^N · n_fock` simulated in the full space.
pub const FULL_DIM_CAP: usize = 4096;
/// Largest full-space dimension [`GhzMode::Auto`] picks before switching to blocks.
pub const AUTO_FULL_DIM: usize = 256;
/// Largest qubit count; the spin-block construction uses dense `2^N` matrices.
pub const MAX_QUBITS: usize = 10;
/// `Ω ≥ MIN_DRIVE_RATIO · max(ν, g)`.
pub const MIN_DRIVE_RATIO: f64 = 20.0;
/// Allowed change of max F2 when the Fock cutoff is doubled.
pub const FOCK_TOL: f64 = 1e-4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum GhzMode {
    /// Full space up to [`AUTO_FULL_DIM`], symmetric blocks above.
    Auto,
    Full,
    Symmetric,
}

#[derive(Clone, Debug, Serialize)]
pub struct GhzParams {
    pub n_qubits: usize,
    pub g: f64,
    pub k: u32,
    pub nu: f64,
    /// Collective Rabi drive `Ω`; only its size relative to `ν, g` is checked.
    pub omega_rabi: f64,
    pub rates: Rates,
    pub n_fock: usize,
    pub mode: GhzMode,
    pub samples: usize,
    /// Integration window in units of `T_k`.
    pub window: f64,
    pub check_convergence: bool,
}

/// `ceil((N/(2√k) + 3)²)`: the largest displacement `N/(2√k)` plus margin.
pub fn default_cutoff(n_qubits: usize, k: u32) -> usize {
    let amp = n_qubits as f64 / (2.0 * (k as f64).sqrt());
    ((amp + 3.0).powi(2)).ceil() as usize
}

impl GhzParams {
    /// `ν = 2g√k`, `Ω = 50·max(ν, g)`, `κ = Γ1 = Γ2 = g/1000`.
    pub fn new(n_qubits: usize, g: f64, k: u32) -> Self {
        let nu = 2.0 * g * (k as f64).sqrt();
        Self {
            n_qubits,
            g,
            k,
            nu,
            omega_rabi: 50.0 * nu.max(g),
            rates: Rates::uniform(g / 1000.0),
            n_fock: default_cutoff(n_qubits, k),
            mode: GhzMode::Auto,
            samples: 240,
            window: 1.25,
            check_convergence: true,
        }
    }

    pub fn unitary(mut self) -> Self {
        self.rates = Rates::default();
        self
    }

    pub fn with_n_fock(mut self, n_fock: usize) -> Self {
        self.n_fock = n_fock;
        self
    }

    pub fn with_mode(mut self, mode: GhzMode) -> Self {
        self.mode = mode;
        self
    }

    /// `T_k = 2kπ/ν`.
    pub fn t_k(&self) -> f64 {
        2.0 * self.k as f64 * PI / self.nu
    }

    /// `A(T_k) = 2kπg²/ν²`.
    pub fn a_at_tk(&self) -> f64 {
        2.0 * self.k as f64 * PI * self.g * self.g / (self.nu * self.nu)
    }

    /// Cavity drive amplitude `ε` from `Ω = 2gε/ν`.
    pub fn epsilon(&self) -> f64 {
        self.omega_rabi * self.nu / (2.0 * self.g)
    }

    pub fn full_dim(&self) -> usize {
        (1usize << self.n_qubits.min(usize::BITS as usize - 1)) * self.n_fock
    }

    pub fn validate(&self) -> Result<(), GhzError> {
        let bad = |m: String| Err(GhzError::InvalidParams(m));
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return bad(format!("n_qubits = {} outside 1..={MAX_QUBITS}", self.n_qubits));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return bad(format!("g = {} must be positive", self.g));
        }
        if self.k == 0 {
            return bad("k must be a positive integer".into());
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu = {} must be positive", self.nu));
        }
        let floor = MIN_DRIVE_RATIO * self.nu.max(self.g);
        if !(self.omega_rabi >= floor) {
            return bad(format!("Omega = {} is below {MIN_DRIVE_RATIO}·max(nu, g) = {floor}", self.omega_rabi));
        }
        if self.n_fock < 2 {
            return bad("n_fock must be at least 2".into());
        }
        if !(self.window > 0.0) || self.samples == 0 {
            return bad("window and samples must be positive".into());
        }
        for (name, r) in [("kappa", self.rates.kappa), ("gamma1", self.rates.gamma1), ("gamma2", self.rates.gamma2)] {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!("{name} = {r} must be finite and ≥ 0"));
            }
        }
        Ok(())
    }

    /// Mode actually used by [`generate`].
    pub fn resolved_mode(&self) -> GhzMode {
        match self.mode {
            GhzMode::Auto if self.full_dim() <= AUTO_FULL_DIM => GhzMode::Full,
            GhzMode::Auto => GhzMode::Symmetric,
            m => m,
        }
    }

    /// Step scales: the detuning and `g·max|J_x| = gN/2`.
    fn omega_scales(&self) -> Vec<f64> {
        vec![self.nu, 0.5 * self.n_qubits as f64 * self.g]
    }

    fn sample_times(&self) -> Vec<f64> {
        let t_end = self.window * self.t_k();
        let mut times: Vec<f64> = (0..=self.samples).map(|i| t_end * i as f64 / self.samples as f64).collect();
        let tk = self.t_k();
        if tk <= t_end {
            if let Err(i) = times.binary_search_by(|t| t.total_cmp(&tk)) {
                times.insert(i, tk);
            }
        }
        times
    }
}

fn qubit_space(n: usize) -> HilbertSpace {
    HilbertSpace::new(vec![2; n]).expect("n ≥ 1")
}

/// `Σ_j op_j / 2` on `n` qubits.
pub fn collective(n: usize, op: &Operator) -> Result<Operator, GhzError> {
    let space = qubit_space(n);
    let half = op.scale(C64::new(0.5, 0.0));
    let mut acc = Operator::zeros(space.clone());
    for j in 0..n {
        acc = &acc + &embed(&half, j, &space)?;
    }
    Ok(acc)
}

pub fn j_x(n: usize) -> Result<Operator, GhzError> {
    collective(n, &ops::sigma_x())
}

/// `(J_x ⊗ a, J_x ⊗ a†)` on qubits ⊗ mode.
fn coupling_pair(n: usize, n_fock: usize) -> Result<(Operator, Operator), GhzError> {
    let jx = j_x(n)?;
    let a = ops::destroy(n_fock);
    let space = HilbertSpace::qubits_and_mode(n, n_fock);
    let lower = tensor(&[&jx, &a])?.with_space(space.clone())?;
    let upper = lower.adjoint();
    Ok((lower, upper))
}

fn check_full_dim(p: &GhzParams) -> Result<(), GhzError> {
    if p.n_qubits > MAX_QUBITS || p.full_dim() > FULL_DIM_CAP {
        return Err(GhzError::DimensionCap { dim: p.full_dim(), cap: FULL_DIM_CAP });
    }
    Ok(())
}

/// `H(t) = g(a e^{−iνt} + a† e^{iνt}) J_x` as a dense operator.
pub fn collective_hamiltonian(t: f64, p: &GhzParams) -> Result<Operator, GhzError> {
    p.validate()?;
    check_full_dim(p)?;
    let (lower, upper) = coupling_pair(p.n_qubits, p.n_fock)?;
    let ph = C64::from_polar(p.g, -p.nu * t);
    Ok((&lower.scale(ph) + &upper.scale(ph.conj())).with_unit(EnergyUnit::AngularGhz))
}

/// The same Hamiltonian as two oscillating terms for the master-equation solver.
pub fn bus_hamiltonian(p: &GhzParams) -> Result<Hamiltonian, GhzError> {
    check_full_dim(p)?;
    let (lower, upper) = coupling_pair(p.n_qubits, p.n_fock)?;
    let amp = C64::new(p.g, 0.0);
    Ok(Hamiltonian::zero(lower.space().clone())
        .with_term(&lower, Coefficient { amplitude: amp, frequency: p.nu })
        .with_term(&upper, Coefficient { amplitude: amp, frequency: -p.nu }))
}

/// `B(t) = ig(1 − e^{−iνt})/ν`.
pub fn b_coeff(t: f64, g: f64, nu: f64) -> C64 {
    C64::new(0.0, g / nu) * (ONE - C64::from_polar(1.0, -nu * t))
}

/// `A(t) = (g²/ν)[t + i(e^{iνt} − 1)/ν]`.
pub fn a_coeff(t: f64, g: f64, nu: f64) -> C64 {
    (C64::new(t, 0.0) + C64::new(0.0, 1.0 / nu) * (C64::from_polar(1.0, nu * t) - ONE)) * (g * g / nu)
}

/// Eigenvalues `m` of `J_x` with their spectral projectors.
fn jx_projectors(n: usize) -> Result<Vec<(f64, Mat<C64>)>, GhzError> {
    let eig = eig_hermitian_matrix(j_x(n)?.matrix())?;
    let d = eig.values.len();
    let mut out: Vec<(f64, Mat<C64>)> = Vec::new();
    for k in 0..d {
        let m = (eig.values[k] * 2.0).round() / 2.0;
        let v = eig.vector(k);
        let proj = Mat::from_fn(d, d, |i, j| v[i] * v[j].conj());
        match out.iter_mut().find(|(mm, _)| *mm == m) {
            Some((_, p)) => *p = &*p + &proj,
            None => out.push((m, proj)),
        }
    }
    Ok(out)
}

/// Closed-form propagator `U(t) = exp[iA J_x²] exp[iB a J_x] exp[iB* a† J_x]`.
///
/// Evaluated block-wise on the `J_x` eigenspaces. The three factors combine to
/// `exp[i Re(A) J_x²] exp[i(Ba + B*a†) J_x]`, whose truncation stays unitary.
pub fn analytic_evolution(t: f64, p: &GhzParams) -> Result<Operator, GhzError> {
    p.validate()?;
    check_full_dim(p)?;
    let nf = p.n_fock;
    let b = b_coeff(t, p.g, p.nu);
    let a_re = a_coeff(t, p.g, p.nu).re;
    let destroy = ops::destroy(nf);
    let a = destroy.matrix();
    let dq = 1usize << p.n_qubits;
    let mut u = Mat::<C64>::zeros(dq * nf, dq * nf);
    for (m, proj) in jx_projectors(p.n_qubits)? {
        let gen = Mat::from_fn(nf, nf, |i, j| C64::new(0.0, m) * (b * a[(i, j)] + b.conj() * a[(j, i)].conj()));
        let w = expm(&gen);
        let phase = C64::from_polar(1.0, a_re * m * m);
        for q in 0..dq {
            for qq in 0..dq {
                let pq = proj[(q, qq)];
                if pq.norm() < 1e-15 {
                    continue;
                }
                for c in 0..nf {
                    for cc in 0..nf {
                        u[(q * nf + c, qq * nf + cc)] += phase * pq * w[(c, cc)];
                    }
                }
            }
        }
    }
    Ok(Operator::new(HilbertSpace::qubits_and_mode(p.n_qubits, nf), u, EnergyUnit::Dimensionless)?)
}

/// `U_D = exp(iπ/2 J_x)`, the extra rotation for odd `N`.
pub fn u_d(n: usize) -> Result<Operator, GhzError> {
    Ok(exp_hermitian(&j_x(n)?, -PI / 2.0)?)
}

/// `(|0…0⟩ + e^{iφ}|1…1⟩)/√2` with `φ = −π(1+N)/2` for even `N`.
///
/// For odd `N` the phase is that reached by `U_D exp(iπ/2 J_x²)|0…0⟩`,
/// `φ = πN/2`.
pub fn ghz_target(n: usize) -> Result<Vec<C64>, GhzError> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(GhzError::InvalidParams(format!("GHZ target needs 2 ≤ N ≤ {MAX_QUBITS}, got {n}")));
    }
    let phi = if n % 2 == 0 { -PI * (1.0 + n as f64) / 2.0 } else { PI * n as f64 / 2.0 };
    let d = 1usize << n;
    let s = 0.5_f64.sqrt();
    let mut v = vec![ZERO; d];
    v[0] = C64::new(s, 0.0);
    v[d - 1] = C64::from_polar(s, phi);
    Ok(v)
}

/// Qubit state whose overlap with `ρ_q(t)` is F2: the GHZ state itself for
/// even `N`, and `U_D† |GHZ⟩` for odd `N` (U_D is applied after the gate).
pub fn protocol_target(n: usize) -> Result<Vec<C64>, GhzError> {
    let ghz = ghz_target(n)?;
    if n % 2 == 0 {
        return Ok(ghz);
    }
    Ok(u_d(n)?.adjoint().apply(&ghz))
}

/// `|0…0⟩ ⊗ |0⟩_c`.
pub fn initial_state(n: usize, n_fock: usize) -> Vec<C64> {
    let mut v = vec![ZERO; (1usize << n) * n_fock];
    v[0] = ONE;
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct GhzResult {
    pub n_qubits: usize,
    pub mode: GhzMode,
    pub trace: FidelityTrace,
    pub max_f2: f64,
    pub t_at_max: f64,
    pub f2_at_tk: f64,
    pub t_k: f64,
    pub n_fock: usize,
    /// Cutoff of the comparison run, if one was made.
    pub n_fock_check: Option<usize>,
    /// `|Δ max F2|` between the two cutoffs.
    pub fock_delta: Option<f64>,
    pub converged: bool,
    pub stats: IntegrationStats,
    pub min_eigenvalue: f64,
}

/// Lindblad dynamics from `|0…0⟩|0⟩` with F2 sampled over `[0, window·T_k]`.
///
/// With `check_convergence`, the run is repeated at twice the cutoff; a change
/// in max F2 above [`FOCK_TOL`] flags the result and triggers one more doubling,
/// whose values are returned.
pub fn generate(p: &GhzParams) -> Result<GhzResult, GhzError> {
    p.validate()?;
    let mut r = generate_once(p)?;
    if !p.check_convergence {
        return Ok(r);
    }
    let mut q = p.clone().with_mode(r.mode);
    q.n_fock *= 2;
    let r2 = generate_once(&q)?;
    let delta = (r2.max_f2 - r.max_f2).abs();
    if delta <= FOCK_TOL {
        r.n_fock_check = Some(q.n_fock);
        r.fock_delta = Some(delta);
        return Ok(r);
    }
    q.n_fock *= 2;
    let mut r3 = generate_once(&q)?;
    let delta3 = (r3.max_f2 - r2.max_f2).abs();
    r3.n_fock_check = Some(r2.n_fock);
    r3.fock_delta = Some(delta3);
    r3.converged = false;
    Ok(r3)
}

/// One run at the given cutoff without convergence checks.
pub fn generate_once(p: &GhzParams) -> Result<GhzResult, GhzError> {
    p.validate()?;
    let times = p.sample_times();
    let target = protocol_target(p.n_qubits.max(2))?;
    let target = if p.n_qubits == 1 { vec![ONE, ZERO] } else { target };
    let mode = p.resolved_mode();
    let (f2, stats, min_eig) = match mode {
        GhzMode::Full => run_full(p, &times, &target)?,
        _ => run_symmetric(p, &times, &target)?,
    };
    let trace = FidelityTrace::new(times, f2);
    Ok(GhzResult {
        n_qubits: p.n_qubits,
        mode,
        max_f2: trace.max,
        t_at_max: trace.argmax,
        f2_at_tk: trace.at(p.t_k()).unwrap_or(f64::NAN),
        t_k: p.t_k(),
        trace,
        n_fock: p.n_fock,
        n_fock_check: None,
        fock_delta: None,
        converged: true,
        stats,
        min_eigenvalue: min_eig,
    })
}

/// `⟨t|tr_c ρ|t⟩` for a block with index `q·n_f + c`.
fn reduced_overlap(rho: &CMatrix, target: &[C64], nf: usize) -> f64 {
    let dq = target.len();
    let mut acc = ZERO;
    for qq in 0..dq {
        let tq = target[qq];
        if tq == ZERO {
            continue;
        }
        for q in 0..dq {
            let tc = target[q].conj();
            if tc == ZERO {
                continue;
            }
            let mut s = ZERO;
            for c in 0..nf {
                s += rho[(q * nf + c, qq * nf + c)];
            }
            acc += tc * s * tq;
        }
    }
    acc.re
}

fn min_eig_of(block: &CMatrix) -> Result<f64, GhzError> {
    let m = block.to_mat();
    let d = m.nrows();
    let herm = Mat::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let vals = eigvals_hermitian(&Operator::from_matrix(herm))?;
    Ok(vals.first().copied().unwrap_or(0.0))
}

fn run_full(p: &GhzParams, times: &[f64], target: &[C64]) -> Result<(Vec<f64>, IntegrationStats, f64), GhzError> {
    let spec = LindbladSpec::new(bus_hamiltonian(p)?, p.rates, 0.0, p.omega_scales())?;
    let gen = LindbladGenerator::new(&spec);
    let psi = initial_state(p.n_qubits, p.n_fock);
    let d = psi.len();
    let mut rho = CMatrix::zeros(d);
    rho[(0, 0)] = ONE;
    let mut state = vec![rho];
    let tk = p.t_k();
    let mut f2 = Vec::with_capacity(times.len());
    let mut min_eig = f64::INFINITY;
    let last = times.len() - 1;
    let stats = integrate(&gen, &mut state, 0.0, times, spec.dt_max(), |i, t, s| {
        f2.push(reduced_overlap(&s[0], target, p.n_fock));
        if i == last || (t - tk).abs() < 1e-12 * tk {
            min_eig = min_eig.min(min_eig_of(&s[0]).map_err(|e| OpenQsError::InvalidSpec(e.to_string()))?);
        }
        Ok(())
    })?;
    Ok((f2, stats, min_eig))
}

/// One irreducible spin-`j` sector of `n` qubits.
#[derive(Clone, Debug)]
pub struct SpinSector {
    /// `2j`.
    pub two_j: usize,
    /// Number of copies of the sector (the `S_N` irrep dimension).
    pub multiplicity: usize,
    /// Isometries `2^N × (2j+1)`, columns ordered `m = j, j−1, …, −j`.
    pub copies: Vec<Mat<C64>>,
}

impl SpinSector {
    pub fn dim(&self) -> usize {
        self.two_j + 1
    }
}

/// Schur decomposition of `(C²)^{⊗n}` into spin sectors, largest `j` first.
///
/// Highest-weight vectors span the kernel of `J₊` at `J_z = j`; the rest of
/// each copy follows by normalized lowering. `J_z = (#excited) − n/2`.
pub fn spin_sectors(n: usize) -> Result<Vec<SpinSector>, GhzError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(GhzError::InvalidParams(format!("spin sectors need 1 ≤ N ≤ {MAX_QUBITS}")));
    }
    let d = 1usize << n;
    let jp = collective(n, &ops::sigma_plus())?.scale(C64::new(2.0, 0.0));
    let jm = jp.adjoint();
    let jp = jp.matrix();
    let jm = jm.matrix();
    let mut out = Vec::new();
    let mut e = n;
    loop {
        let two_j = 2 * e - n;
        let sector: Vec<usize> = (0..d).filter(|s| s.count_ones() as usize == e).collect();
        let ns = sector.len();
        // Gram matrix of J₊ restricted to the sector.
        let gram = Mat::from_fn(ns, ns, |a, b| {
            (0..d).map(|r| jp[(r, sector[a])].conj() * jp[(r, sector[b])]).sum::<C64>()
        });
        let eig = eig_hermitian_matrix(&gram)?;
        let mut copies = Vec::new();
        for k in 0..ns {
            if eig.values[k] > 1e-8 {
                continue;
            }
            let mut col = vec![ZERO; d];
            for (a, &s) in sector.iter().enumerate() {
                col[s] = eig.vectors[(a, k)];
            }
            let mut iso = Mat::<C64>::zeros(d, two_j + 1);
            for mu in 0..=two_j {
                for i in 0..d {
                    iso[(i, mu)] = col[i];
                }
                let mut next = vec![ZERO; d];
                for j in 0..d {
                    if col[j] == ZERO {
                        continue;
                    }
                    for i in 0..d {
                        next[i] += jm[(i, j)] * col[j];
                    }
                }
                let norm = next.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    next.iter_mut().for_each(|x| *x /= norm);
                }
                col = next;
            }
            copies.push(iso);
        }
        if !copies.is_empty() {
            out.push(SpinSector { two_j, multiplicity: copies.len(), copies });
        }
        if 2 * e <= n + 1 {
            break;
        }
        e -= 1;
    }
    Ok(out)
}

fn compress(iso: &Mat<C64>, op: &Mat<C64>, iso_right: &Mat<C64>) -> Mat<C64> {
    iso.adjoint() * op * iso_right
}

/// Sparse superoperator entry `out[μ,μ'] += w · in[m,m']` on qubit labels.
#[derive(Clone, Copy, Debug)]
struct Transfer {
    mu: usize,
    mu_p: usize,
    m: usize,
    m_p: usize,
    w: C64,
}

/// Block generator on the permutation-invariant operator space.
///
/// The state is `ρ = ⊕_j ρ_j ⊗ 1_{mult(j)}`, each `ρ_j` on spin-`j` ⊗ cavity with
/// index `μ·n_f + c`.
pub struct SymmetricGenerator {
    nf: usize,
    dims: Vec<usize>,
    mult: Vec<usize>,
    /// Coherent parts `(−iH − ½K)` split into time-dependent terms.
    terms: Vec<Vec<(SparseOp, Coefficient)>>,
    decay: Vec<SparseOp>,
    cavity_jump: Vec<Option<SparseOp>>,
    /// `transfers[target][source]`.
    transfers: Vec<Vec<Vec<Transfer>>>,
}

fn kron_block(q: &Mat<C64>, c: &Mat<C64>) -> SparseOp {
    let (dq, dc) = (q.nrows(), c.nrows());
    let mut e = Vec::new();
    for i in 0..dq {
        for j in 0..dq {
            let a = q[(i, j)];
            if a.norm() < 1e-14 {
                continue;
            }
            for k in 0..dc {
                for l in 0..dc {
                    let b = c[(k, l)];
                    if b != ZERO {
                        e.push((i * dc + k, j * dc + l, a * b));
                    }
                }
            }
        }
    }
    SparseOp::from_triplets(dq * dc, e)
}

impl SymmetricGenerator {
    pub fn new(p: &GhzParams, sectors: &[SpinSector]) -> Result<Self, GhzError> {
        let n = p.n_qubits;
        let nf = p.n_fock;
        let space = qubit_space(n);
        let jx = j_x(n)?;
        let excited = collective(n, &ops::projector(2, 1, 1))?.scale(C64::new(2.0, 0.0));
        let a = ops::destroy(nf);
        let ad = a.adjoint();
        let num = ops::number(nf);
        let id_c = Mat::<C64>::identity(nf, nf);
        let r = p.rates;

        let mut terms = Vec::new();
        let mut decay = Vec::new();
        let mut cavity_jump = Vec::new();
        for s in sectors {
            let e0 = &s.copies[0];
            let jx_b = compress(e0, jx.matrix(), e0);
            let coeff = C64::new(p.g, 0.0);
            terms.push(vec![
                (kron_block(&jx_b, a.matrix()), Coefficient { amplitude: coeff, frequency: p.nu }),
                (kron_block(&jx_b, ad.matrix()), Coefficient { amplitude: coeff, frequency: -p.nu }),
            ]);
            // K = κ a†a + Γ1 Σσ⁺σ⁻ + Γ2 N
            let exc_b = compress(e0, excited.matrix(), e0);
            let id_q = Mat::<C64>::identity(s.dim(), s.dim());
            let k_cav = kron_block(&id_q, num.matrix()).scale(C64::new(r.kappa, 0.0));
            let k_q = kron_block(&exc_b, &id_c).scale(C64::new(r.gamma1, 0.0));
            let k_z = kron_block(&id_q, &id_c).scale(C64::new(r.gamma2 * n as f64, 0.0));
            decay.push(k_cav.add(&k_q).add(&k_z).scale(C64::new(-0.5, 0.0)));
            cavity_jump.push(if r.kappa > 0.0 {
                Some(kron_block(&id_q, a.matrix()).scale(C64::new(r.kappa.sqrt(), 0.0)))
            } else {
                None
            });
        }

        let mut locals: Vec<(f64, Operator)> = Vec::new();
        for j in 0..n {
            if r.gamma1 > 0.0 {
                locals.push((r.gamma1, embed(&ops::sigma_minus(), j, &space)?));
            }
            if r.gamma2 > 0.0 {
                locals.push((r.gamma2, embed(&ops::sigma_z(), j, &space)?));
            }
        }
        let nb = sectors.len();
        let mut transfers = vec![vec![Vec::new(); nb]; nb];
        for (tb, target) in sectors.iter().enumerate() {
            let et = &target.copies[0];
            for (sb, source) in sectors.iter().enumerate() {
                if target.two_j.abs_diff(source.two_j) > 2 {
                    continue;
                }
                let (dt, ds) = (target.dim(), source.dim());
                let mut acc = vec![ZERO; dt * dt * ds * ds];
                for (rate, l) in &locals {
                    for es in &source.copies {
                        let m = compress(et, l.matrix(), es);
                        for mu in 0..dt {
                            for mm in 0..ds {
                                let x = m[(mu, mm)];
                                if x.norm() < 1e-14 {
                                    continue;
                                }
                                for mu_p in 0..dt {
                                    for mm_p in 0..ds {
                                        let y = m[(mu_p, mm_p)];
                                        if y.norm() < 1e-14 {
                                            continue;
                                        }
                                        acc[((mu * dt + mu_p) * ds + mm) * ds + mm_p] += x * y.conj() * *rate;
                                    }
                                }
                            }
                        }
                    }
                }
                let mut list = Vec::new();
                for mu in 0..dt {
                    for mu_p in 0..dt {
                        for m in 0..ds {
                            for m_p in 0..ds {
                                let w = acc[((mu * dt + mu_p) * ds + m) * ds + m_p];
                                if w.norm() > 1e-13 {
                                    list.push(Transfer { mu, mu_p, m, m_p, w });
                                }
                            }
                        }
                    }
                }
                transfers[tb][sb] = list;
            }
        }
        Ok(Self {
            nf,
            dims: sectors.iter().map(|s| s.dim() * nf).collect(),
            mult: sectors.iter().map(|s| s.multiplicity).collect(),
            terms,
            decay,
            cavity_jump,
            transfers,
        })
    }

    /// Number of stored qubit-label transfer coefficients.
    pub fn transfer_len(&self) -> usize {
        self.transfers.iter().flatten().map(|l| l.len()).sum()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.dims
    }

    fn apply_transfers(&self, list: &[Transfer], src: &CMatrix, out: &mut CMatrix) {
        let nf = self.nf;
        let ns = src.dim();
        let nt = out.dim();
        let sdata = src.data();
        let odata = out.data_mut();
        for tr in list {
            for cp in 0..nf {
                let scol = (tr.m_p * nf + cp) * ns + tr.m * nf;
                let ocol = (tr.mu_p * nf + cp) * nt + tr.mu * nf;
                for c in 0..nf {
                    odata[ocol + c] += tr.w * sdata[scol + c];
                }
            }
        }
    }
}

impl Generator for SymmetricGenerator {
    fn rhs(&self, t: f64, state: &[CMatrix], out: &mut [CMatrix]) {
        out.par_iter_mut().enumerate().for_each(|(b, o)| {
            let rho = &state[b];
            let d = self.dims[b];
            o.fill_zero();
            let mut x = CMatrix::zeros(d);
            for (s, c) in &self.terms[b] {
                s.apply_left(C64::new(0.0, -1.0) * c.at(t), rho, &mut x);
            }
            self.decay[b].apply_left(ONE, rho, &mut x);
            o.add_hermitian_part(&x);
            if let Some(l) = &self.cavity_jump[b] {
                l.sandwich(rho, o);
            }
            for (sb, list) in self.transfers[b].iter().enumerate() {
                if !list.is_empty() {
                    self.apply_transfers(list, &state[sb], o);
                }
            }
        });
    }

    fn trace(&self, state: &[CMatrix]) -> C64 {
        state.iter().zip(&self.mult).map(|(b, &m)| b.trace() * m as f64).sum()
    }
}

fn run_symmetric(p: &GhzParams, times: &[f64], target: &[C64]) -> Result<(Vec<f64>, IntegrationStats, f64), GhzError> {
    let sectors = spin_sectors(p.n_qubits)?;
    let gen = SymmetricGenerator::new(p, &sectors)?;
    let nf = p.n_fock;
    let top = &sectors[0].copies[0];
    // |0…0⟩ and the target both live in the j = N/2 sector.
    let mut init = vec![ZERO; top.ncols()];
    let mut tgt = vec![ZERO; top.ncols()];
    for mu in 0..top.ncols() {
        init[mu] = top[(0, mu)].conj();
        tgt[mu] = (0..top.nrows()).map(|i| top[(i, mu)].conj() * target[i]).sum();
    }
    let mut state: Vec<CMatrix> = gen.block_dims().iter().map(|&d| CMatrix::zeros(d)).collect();
    for mu in 0..init.len() {
        for mu_p in 0..init.len() {
            state[0][(mu * nf, mu_p * nf)] = init[mu] * init[mu_p].conj();
        }
    }
    let spec_dt = 0.01 / p.omega_scales().into_iter().fold(0.0, f64::max);
    let tk = p.t_k();
    let last = times.len() - 1;
    let mut f2 = Vec::with_capacity(times.len());
    let mut min_eig = f64::INFINITY;
    let stats = integrate(&gen, &mut state, 0.0, times, spec_dt, |i, t, s| {
        f2.push(reduced_overlap(&s[0], &tgt, nf));
        if i == last || (t - tk).abs() < 1e-12 * tk {
            for b in s {
                min_eig = min_eig.min(min_eig_of(b).map_err(|e| OpenQsError::InvalidSpec(e.to_string()))?);
            }
        }
        Ok(())
    })?;
    Ok((f2, stats, min_eig))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub gamma1_over_kappa: f64,
    pub gamma2_over_kappa: f64,
    pub max_f2: f64,
}

/// Max F2 on a `(Γ1, Γ2)` grid given in units of `κ`, with `κ` from `base`.
pub fn rate_sweep(base: &GhzParams, gamma1_grid: &[f64], gamma2_grid: &[f64]) -> Result<Vec<SweepRow>, GhzError> {
    base.validate()?;
    let kappa = base.rates.kappa;
    let points: Vec<(f64, f64)> =
        gamma1_grid.iter().flat_map(|&a| gamma2_grid.iter().map(move |&b| (a, b))).collect();
    points
        .par_iter()
        .map(|&(x1, x2)| {
            let mut p = base.clone();
            p.rates = Rates { kappa, gamma1: x1 * kappa, gamma2: x2 * kappa };
            p.check_convergence = false;
            let r = generate_once(&p)?;
            Ok(SweepRow { gamma1_over_kappa: x1, gamma2_over_kappa: x2, max_f2: r.max_f2 })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DriveCheck {
    pub omega_over_nu: f64,
    /// `|⟨ψ_16|ψ_17⟩|²` at `T_k`.
    pub state_fidelity: f64,
    /// F2 of the state that keeps the `Ω ± ν` terms.
    pub f2_with_drive_terms: f64,
}

/// Unitary check of the dropped fast terms: integrates the interaction-picture
/// Hamiltonian with `e^{±iΩt}|±⟩⟨∓|` terms and compares with the reduced form at `T_k`.
pub fn drive_term_check(p: &GhzParams) -> Result<DriveCheck, GhzError> {
    p.validate()?;
    check_full_dim(p)?;
    let n = p.n_qubits;
    let nf = p.n_fock;
    let space = HilbertSpace::qubits_and_mode(n, nf);
    // |+⟩⟨−| with |±⟩ = (|0⟩ ± |1⟩)/√2
    let plus_minus = Operator::from_rows([
        [C64::new(0.5, 0.0), C64::new(-0.5, 0.0)],
        [C64::new(0.5, 0.0), C64::new(-0.5, 0.0)],
    ]);
    let qs = qubit_space(n);
    let mut sx = Operator::zeros(qs.clone());
    let mut pm = Operator::zeros(qs.clone());
    for j in 0..n {
        sx = &sx + &embed(&ops::sigma_x(), j, &qs)?;
        pm = &pm + &embed(&plus_minus, j, &qs)?;
    }
    let a = ops::destroy(nf);
    let lift = |q: &Operator| -> Result<Operator, GhzError> { Ok(tensor(&[q, &a])?.with_space(space.clone())?) };
    let (a_sx, a_pm, a_mp) = (lift(&sx)?, lift(&pm)?, lift(&pm.adjoint())?);
    let (g, nu, om) = (p.g, p.nu, p.omega_rabi);
    let h = |t: f64| {
        let x = &(&a_sx + &a_pm.scale(C64::from_polar(1.0, om * t))) - &a_mp.scale(C64::from_polar(1.0, -om * t));
        let x = x.scale(C64::from_polar(0.5 * g, -nu * t));
        &x + &x.adjoint()
    };
    let psi0 = initial_state(n, nf);
    let tk = p.t_k();
    let policy = StepPolicy::default().with_frequency_bound(om + nu);
    let psi16 = propagate_state(h, &psi0, 0.0, &[tk], &policy)?.remove(0);
    let psi17 = analytic_evolution(tk, p)?.apply(&psi0);
    let overlap: C64 = psi16.iter().zip(&psi17).map(|(x, y)| x.conj() * y).sum();
    let target = protocol_target(n)?;
    let dq = 1usize << n;
    let mut f2 = 0.0;
    for c in 0..nf {
        let amp: C64 = (0..dq).map(|q| target[q].conj() * psi16[q * nf + c]).sum();
        f2 += amp.norm_sqr();
    }
    Ok(DriveCheck { omega_over_nu: om / nu, state_fidelity: overlap.norm_sqr(), f2_with_drive_terms: f2 })
}
