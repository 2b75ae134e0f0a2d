//! Driven Majorana junction coupled to a cavity: Bessel sideband reduction to
//! Jaynes-Cummings parameters and direct checks of the rotating-wave step.
//!
//! Frequencies and energies are angular, in rad/ns (`ħ = 1`).

use std::f64::consts::PI;

use faer::Mat;
use serde::Serialize;
use thiserror::Error;

use crate::qcore::{
    ops, propagate_state, tensor, EnergyUnit, HilbertSpace, Operator, QcoreError, StepPolicy, C64,
};
use crate::units::{ghz_to_rad_per_ns, rad_per_ns_to_mhz};

#[derive(Debug, Error)]
pub enum DriveError {
    #[error("bessel_j({n}, {x}) outside supported range n ≤ 60, |x| ≤ 50")]
    BesselRange { n: u32, x: f64 },
    #[error("invalid drive parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Core(#[from] QcoreError),
}

/// Largest order accepted by [`bessel_j`].
pub const BESSEL_MAX_ORDER: u32 = 60;
/// Largest `|x|` accepted by [`bessel_j`].
pub const BESSEL_MAX_ARG: f64 = 50.0;
/// Smallness threshold for the sideband transformation amplitudes.
pub const NEGLECT_THRESHOLD: f64 = 0.05;

/// Bessel function of the first kind `J_n(x)` by Miller's backward recurrence.
pub fn bessel_j(n: u32, x: f64) -> Result<f64, DriveError> {
    if n > BESSEL_MAX_ORDER || !x.is_finite() || x.abs() > BESSEL_MAX_ARG {
        return Err(DriveError::BesselRange { n, x });
    }
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let ax = x.abs();
    let top = (n as f64).max(ax);
    let mut m = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    m += m % 2;
    let (mut jp, mut j) = (0.0_f64, 1e-300_f64);
    let mut result = 0.0;
    let mut sum = 0.0;
    for k in (1..=m).rev() {
        let jm = 2.0 * k as f64 / ax * j - jp;
        jp = j;
        j = jm;
        if (k - 1) as u32 == n {
            result = j;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            sum += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            result *= 1e-250;
            sum *= 1e-250;
        }
    }
    sum += j;
    let value = result / sum;
    Ok(if x < 0.0 && n % 2 == 1 { -value } else { value })
}

/// First positive root of `J_0`.
pub fn theta_star() -> f64 {
    let j0 = |t: f64| bessel_j(0, t).expect("in range");
    let j1 = |t: f64| bessel_j(1, t).expect("in range");
    let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
    let mut t = 2.4;
    for _ in 0..100 {
        let f = j0(t);
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t + f / j1(t);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - t).abs() < 1e-16 {
            t = next;
            break;
        }
        t = next;
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct JunctionDriveParams {
    pub e1: f64,
    pub e2: f64,
    pub e_m: f64,
    pub lambda_g: f64,
    pub lambda_c: f64,
    pub omega: f64,
    pub omega_c: f64,
    pub phi0: f64,
    pub n_fock: usize,
    /// Keep `E1` in `E = E2 − E1`; otherwise `E = E2`.
    pub include_e1: bool,
}

impl JunctionDriveParams {
    /// Operating point with `E = 2π×0.2 GHz`, `E_M = 2π×0.5 GHz`, `ω = 10E_M`,
    /// `ω_c = 2π×5.2 GHz`, `λ_c/ω_c = 0.05`, `θ = θ*`, `φ0 = π`.
    pub fn operating_point() -> Self {
        let e_m = ghz_to_rad_per_ns(0.5);
        let omega = 10.0 * e_m;
        let omega_c = ghz_to_rad_per_ns(5.2);
        let e2 = ghz_to_rad_per_ns(0.2);
        Self {
            e1: 0.01 * e2,
            e2,
            e_m,
            lambda_g: theta_star() * omega,
            lambda_c: 0.05 * omega_c,
            omega,
            omega_c,
            phi0: PI,
            n_fock: 5,
            include_e1: false,
        }
    }

    /// Qubit splitting `E`.
    pub fn energy(&self) -> f64 {
        if self.include_e1 {
            self.e2 - self.e1
        } else {
            self.e2
        }
    }

    pub fn theta(&self) -> f64 {
        self.lambda_g / self.omega
    }

    pub fn g0(&self) -> f64 {
        self.e_m * self.lambda_c / (2.0 * self.omega_c)
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.lambda_g = theta * self.omega;
        self
    }

    /// Sets `E` (through `E2`) so that `ω_tq` stays as given at `θ = θ*`.
    pub fn with_energy(mut self, e: f64) -> Self {
        self.e2 = if self.include_e1 { e + self.e1 } else { e };
        self
    }

    /// Retunes `ω` to the `n = 1` resonance `ω = ω_c − ω_tq` at fixed `θ`.
    pub fn at_resonance(self) -> Result<Self, DriveError> {
        let theta = self.theta();
        let eff = effective_params(&self)?;
        let mut p = self;
        p.omega = p.omega_c - eff.omega_tq;
        p.lambda_g = theta * p.omega;
        Ok(p)
    }

    /// Multiplies every energy and frequency by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            e1: self.e1 * c,
            e2: self.e2 * c,
            e_m: self.e_m * c,
            lambda_g: self.lambda_g * c,
            lambda_c: self.lambda_c * c,
            omega: self.omega * c,
            omega_c: self.omega_c * c,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), DriveError> {
        let vals = [
            self.e1, self.e2, self.e_m, self.lambda_g, self.lambda_c, self.omega, self.omega_c, self.phi0,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(DriveError::InvalidParams("non-finite parameter".into()));
        }
        if self.omega <= 0.0 || self.omega_c <= 0.0 {
            return Err(DriveError::InvalidParams("ω and ω_c must be positive".into()));
        }
        if self.e_m < 0.0 || self.lambda_c < 0.0 || self.lambda_g < 0.0 {
            return Err(DriveError::InvalidParams("E_M, λ_c, λ_g must be non-negative".into()));
        }
        if self.lambda_c / self.omega_c > 0.1 {
            return Err(DriveError::InvalidParams(format!(
                "λ_c/ω_c = {:.3} exceeds 0.1",
                self.lambda_c / self.omega_c
            )));
        }
        if self.n_fock < 3 {
            return Err(DriveError::InvalidParams("n_fock must be at least 3".into()));
        }
        if self.theta() > BESSEL_MAX_ARG {
            return Err(DriveError::InvalidParams("θ out of Bessel range".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EffectiveJcParams {
    pub omega_tq: f64,
    pub vartheta: f64,
    pub g: f64,
    pub g_prime: f64,
    /// Drive frequency of the `n = 1` resonance, `ω_c − ω_tq`.
    pub omega_res: f64,
    pub theta: f64,
    pub g0: f64,
}

/// Static qubit field `−cos φ0 J0(θ) E_M` along `σx`.
fn static_x_field(p: &JunctionDriveParams) -> Result<f64, DriveError> {
    Ok(-p.phi0.cos() * bessel_j(0, p.theta())? * p.e_m)
}

/// Effective qubit splitting and sideband couplings.
///
/// For general `φ0` the static field is `cos φ0 J0(θ) E_M` and the first
/// sideband amplitude `−cos φ0 g0 J1(θ)`; both reduce to the `φ0 = π` forms.
pub fn effective_params(p: &JunctionDriveParams) -> Result<EffectiveJcParams, DriveError> {
    p.validate()?;
    let theta = p.theta();
    let e = p.energy();
    let bx = static_x_field(p)?;
    let omega_tq = e.hypot(bx);
    let (cos_v, sin_v) = if omega_tq > 0.0 { (e / omega_tq, bx / omega_tq) } else { (1.0, 0.0) };
    let g1 = -p.phi0.cos() * p.g0() * bessel_j(1, theta)?;
    Ok(EffectiveJcParams {
        omega_tq,
        vartheta: sin_v.atan2(cos_v),
        g: g1 * cos_v,
        g_prime: g1 * sin_v,
        omega_res: p.omega_c - omega_tq,
        theta,
        g0: p.g0(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NeglectReport {
    /// `β_m` for `m = 1..=8`.
    pub beta: Vec<f64>,
    /// `J1(2|β_2|)`.
    pub j1_two_beta2: f64,
    /// `J_n(θ) E_M/(nω)` for `n = 1..=8`.
    pub smallness: Vec<f64>,
    pub max_abs_beta: f64,
    pub max_smallness: f64,
    pub threshold: f64,
    /// Every `|β_m| ≤ threshold`.
    pub passes: bool,
    /// Every `J_n(θ)E_M/(nω) ≤ threshold`, regardless of `φ0`.
    pub raw_passes: bool,
}

/// Amplitudes of the frame transformations that remove the fast `E_M` drive.
pub fn neglect_condition(p: &JunctionDriveParams) -> Result<NeglectReport, DriveError> {
    let theta = p.theta();
    let mut beta = Vec::with_capacity(8);
    let mut smallness = Vec::with_capacity(8);
    for m in 1..=8u32 {
        let base = p.e_m * bessel_j(m, theta)? / (m as f64 * p.omega);
        smallness.push(base.abs());
        beta.push(if m % 2 == 1 {
            let sign = if ((m - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            sign * p.phi0.sin() * base
        } else {
            p.phi0.cos() * base
        });
    }
    let max_abs_beta = beta.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let max_smallness = smallness.iter().fold(0.0_f64, |a, b| a.max(*b));
    Ok(NeglectReport {
        j1_two_beta2: bessel_j(1, 2.0 * beta[1].abs())?,
        max_abs_beta,
        max_smallness,
        threshold: NEGLECT_THRESHOLD,
        passes: max_abs_beta <= NEGLECT_THRESHOLD,
        raw_passes: max_smallness <= NEGLECT_THRESHOLD,
        beta,
        smallness,
    })
}

/// Time-independent pieces of the qubit ⊗ cavity Hamiltonians.
struct Pieces {
    space: HilbertSpace,
    sz: Mat<C64>,
    sx: Mat<C64>,
    sx_a: Mat<C64>,
    sp_a: Mat<C64>,
    sp_ad: Mat<C64>,
}

impl Pieces {
    fn new(n_fock: usize) -> Self {
        let id = ops::identity(n_fock);
        let a = ops::destroy(n_fock);
        let ad = a.adjoint();
        let m = |x: &Operator, y: &Operator| tensor(&[x, y]).expect("small").into_matrix();
        Self {
            space: HilbertSpace::qubits_and_mode(1, n_fock),
            sz: m(&ops::sigma_z(), &id),
            sx: m(&ops::sigma_x(), &id),
            sx_a: m(&ops::sigma_x(), &a),
            sp_a: m(&ops::sigma_plus(), &a),
            sp_ad: m(&ops::sigma_plus(), &ad),
        }
    }

    fn op(&self, m: Mat<C64>) -> Operator {
        Operator::new(self.space.clone(), m, EnergyUnit::AngularGhz).expect("dims agree")
    }
}

fn full_from_pieces(pc: &Pieces, t: f64, p: &JunctionDriveParams) -> Operator {
    let arg = p.theta() * (p.omega * t).cos() + p.phi0;
    let cz = 0.5 * p.energy();
    let cx = -0.5 * p.e_m * arg.cos();
    let cg = -p.g0() * arg.sin();
    let ph = C64::from_polar(1.0, -p.omega_c * t);
    let d = pc.sz.nrows();
    pc.op(Mat::from_fn(d, d, |i, j| {
        let a_part = pc.sx_a[(i, j)] * ph + (pc.sx_a[(j, i)] * ph).conj();
        pc.sz[(i, j)] * cz + pc.sx[(i, j)] * cx + a_part * cg
    }))
}

/// Lab-frame Hamiltonian on qubit ⊗ Fock(`n_fock`):
/// `(E/2)σz − (E_M/2)cos(θcos ωt + φ0)σx − g0 sin(θcos ωt + φ0)(a e^{−iω_c t} + h.c.)σx`.
pub fn full_hamiltonian(t: f64, p: &JunctionDriveParams) -> Operator {
    full_from_pieces(&Pieces::new(p.n_fock), t, p)
}

/// `g(aσ⁺ + a†σ⁻)`.
pub fn jc_hamiltonian(g: f64, n_fock: usize) -> Operator {
    let pc = Pieces::new(n_fock);
    jc_from_pieces(&pc, g)
}

fn jc_from_pieces(pc: &Pieces, g: f64) -> Operator {
    let d = pc.sz.nrows();
    pc.op(Mat::from_fn(d, d, |i, j| {
        (pc.sp_a[(i, j)] + pc.sp_a[(j, i)].conj()) * g
    }))
}

/// `g(a†σ⁺e^{2iω_tq t} + aσ⁻e^{−2iω_tq t})`.
pub fn ajc_term(t: f64, g: f64, omega_tq: f64, n_fock: usize) -> Operator {
    ajc_from_pieces(&Pieces::new(n_fock), t, g, omega_tq)
}

fn ajc_from_pieces(pc: &Pieces, t: f64, g: f64, omega_tq: f64) -> Operator {
    let ph = C64::from_polar(g, 2.0 * omega_tq * t);
    let d = pc.sz.nrows();
    pc.op(Mat::from_fn(d, d, |i, j| pc.sp_ad[(i, j)] * ph + (pc.sp_ad[(j, i)] * ph).conj()))
}

/// `(|0⟩_t + |1⟩_t)/√2 ⊗ |0⟩_c`.
pub fn transfer_initial_state(n_fock: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 2 * n_fock];
    v[0] = C64::new(0.5_f64.sqrt(), 0.0);
    v[n_fock] = C64::new(0.5_f64.sqrt(), 0.0);
    v
}

/// `|0⟩_t ⊗ (|0⟩_c − i|1⟩_c)/√2`.
pub fn transfer_target_state(n_fock: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 2 * n_fock];
    v[0] = C64::new(0.5_f64.sqrt(), 0.0);
    v[1] = C64::new(0.0, -(0.5_f64.sqrt()));
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct RwaReport {
    pub times: Vec<f64>,
    pub f_full: Vec<f64>,
    pub f_jc: Vec<f64>,
    pub f_jc_ajc: Vec<f64>,
    pub max_diff_jc_ajc: f64,
    /// Over `0 ≤ t ≤ π/(2g)`.
    pub max_diff_full_jc_transfer: f64,
    pub max_diff_full_jc: f64,
    /// As `max_diff_full_jc_transfer` without the sideband frame `U(t)`.
    pub raw_frame_diff_full_jc_transfer: f64,
    /// `max_t |F_full − F_jc|` with `|·|²` replaced by the state overlap `1 − |⟨ψ_jc|ψ_full⟩|²`.
    pub max_state_infidelity_full_jc: f64,
    pub max_norm_defect: f64,
    /// Largest trace change when `n_fock` is doubled.
    pub fock_change: f64,
    pub n_fock: usize,
    pub g: f64,
    pub omega_tq: f64,
}

struct Traces {
    f_full: Vec<f64>,
    f_full_raw: Vec<f64>,
    f_jc: Vec<f64>,
    f_ajc: Vec<f64>,
    full_states: Vec<Vec<C64>>,
    jc_states: Vec<Vec<C64>>,
    norm_defect: f64,
}

fn overlap_sq(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

fn run_traces(p: &JunctionDriveParams, times: &[f64], with_full: bool) -> Result<Traces, DriveError> {
    let eff = effective_params(p)?;
    let n = p.n_fock;
    let pc = Pieces::new(n);
    let psi0 = transfer_initial_state(n);
    let target = transfer_target_state(n);
    let g = eff.g;
    let w = eff.omega_tq;

    let jc = jc_from_pieces(&pc, g);
    let jc_policy = StepPolicy::default();
    let jc_states = propagate_state(|_| jc.clone(), &psi0, 0.0, times, &jc_policy)?;
    let ajc_policy = StepPolicy::default().with_frequency_bound(2.0 * w);
    let ajc_states = propagate_state(
        |t| {
            let a = ajc_from_pieces(&pc, t, g, w);
            &jc + &a
        },
        &psi0,
        0.0,
        times,
        &ajc_policy,
    )?;

    // Qubit eigenbasis rotation R: lab = R · eigen.
    let (c2, s2) = ((0.5 * eff.vartheta).cos(), (0.5 * eff.vartheta).sin());
    let r = [[c2, s2], [-s2, c2]];
    let rotate = |psi: &[C64], forward: bool| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for k in 0..n {
            let (x0, x1) = (psi[k], psi[n + k]);
            if forward {
                out[k] = x0 * r[0][0] + x1 * r[0][1];
                out[n + k] = x0 * r[1][0] + x1 * r[1][1];
            } else {
                out[k] = x0 * r[0][0] + x1 * r[1][0];
                out[n + k] = x0 * r[0][1] + x1 * r[1][1];
            }
        }
        out
    };

    // Sideband frame U(t) = exp(i B(t) σx), B = Σ β_m sin(mωt), which removes the fast E_M drive.
    let betas = neglect_condition(p)?.beta;
    let to_frame = |psi: &[C64], t: f64, sideband: bool| -> Vec<C64> {
        let mut lab = psi.to_vec();
        if sideband {
            let b: f64 = betas
                .iter()
                .enumerate()
                .map(|(k, bm)| bm * ((k + 1) as f64 * p.omega * t).sin())
                .sum();
            let (c, is) = (C64::new(b.cos(), 0.0), C64::new(0.0, b.sin()));
            for k in 0..n {
                let (x0, x1) = (psi[k], psi[n + k]);
                lab[k] = c * x0 + is * x1;
                lab[n + k] = is * x0 + c * x1;
            }
        }
        let mut e = rotate(&lab, false);
        let (lo, hi) = (C64::from_polar(1.0, -0.5 * w * t), C64::from_polar(1.0, 0.5 * w * t));
        for k in 0..n {
            e[k] *= lo;
            e[n + k] *= hi;
        }
        e
    };

    let (full_states, raw_states) = if with_full {
        let harmonics = p.theta() + 6.0;
        let policy = StepPolicy::default().with_frequency_bound(p.omega_c + harmonics * p.omega);
        let lab0 = rotate(&psi0, true);
        let lab = propagate_state(|t| full_from_pieces(&pc, t, p), &lab0, 0.0, times, &policy)?;
        let framed = lab.iter().zip(times).map(|(psi, &t)| to_frame(psi, t, true)).collect();
        let raw = lab.iter().zip(times).map(|(psi, &t)| to_frame(psi, t, false)).collect();
        (framed, raw)
    } else {
        (Vec::new(), Vec::new())
    };

    let norm_defect = jc_states
        .iter()
        .chain(&ajc_states)
        .chain(&full_states)
        .map(|s| (s.iter().map(|x| x.norm_sqr()).sum::<f64>() - 1.0).abs())
        .fold(0.0_f64, f64::max);
    let fid = |states: &[Vec<C64>]| states.iter().map(|s| overlap_sq(&target, s)).collect::<Vec<_>>();
    Ok(Traces {
        f_full: fid(&full_states),
        f_full_raw: fid(&raw_states),
        f_jc: fid(&jc_states),
        f_ajc: fid(&ajc_states),
        full_states,
        jc_states,
        norm_defect,
    })
}

/// Fidelity traces `(F_full, F_jc, F_jc_ajc)` against the transfer target at `times`,
/// without retuning `ω`.
pub fn rwa_traces(
    p: &JunctionDriveParams,
    times: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), DriveError> {
    let tr = run_traces(p, times, true)?;
    Ok((tr.f_full, tr.f_jc, tr.f_ajc))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Propagates `(|0⟩+|1⟩)/√2 ⊗ |0⟩` under the lab Hamiltonian, JC, and JC+AJC
/// for `periods` Rabi periods `2π/g`.
///
/// The lab-frame state is compared after the sideband transformation `U(t)`,
/// the qubit eigenbasis rotation, and the interaction picture of `ω_tq σz/2`.
///
/// `ω` is retuned to the `n = 1` resonance first.
pub fn validate_rwa(
    p: &JunctionDriveParams,
    periods: usize,
    samples_per_period: usize,
) -> Result<RwaReport, DriveError> {
    let p = p.clone().at_resonance()?;
    let eff = effective_params(&p)?;
    if eff.g == 0.0 {
        return Err(DriveError::InvalidParams("g = 0: no Rabi period".into()));
    }
    let g = eff.g.abs();
    let t_end = periods as f64 * 2.0 * PI / g;
    let n_samples = periods * samples_per_period.max(4);
    let mut times: Vec<f64> = (0..=n_samples).map(|k| t_end * k as f64 / n_samples as f64).collect();
    let t_transfer = PI / (2.0 * g);
    if let Err(i) = times.binary_search_by(|t| t.total_cmp(&t_transfer)) {
        times.insert(i, t_transfer);
    }
    let tr = run_traces(&p, &times, true)?;

    let mut doubled = p.clone();
    doubled.n_fock = 2 * p.n_fock;
    let tr2 = run_traces(&doubled, &times, true)?;
    let fock_change = max_abs_diff(&tr.f_full, &tr2.f_full)
        .max(max_abs_diff(&tr.f_jc, &tr2.f_jc))
        .max(max_abs_diff(&tr.f_ajc, &tr2.f_ajc));

    let transfer_len = times.iter().take_while(|&&t| t <= t_transfer).count();
    let state_inf = tr
        .full_states
        .iter()
        .zip(&tr.jc_states)
        .take(transfer_len)
        .map(|(a, b)| 1.0 - overlap_sq(a, b))
        .fold(0.0_f64, f64::max);
    Ok(RwaReport {
        max_diff_jc_ajc: max_abs_diff(&tr.f_jc, &tr.f_ajc),
        max_diff_full_jc_transfer: max_abs_diff(&tr.f_full[..transfer_len], &tr.f_jc[..transfer_len]),
        max_diff_full_jc: max_abs_diff(&tr.f_full, &tr.f_jc),
        raw_frame_diff_full_jc_transfer: max_abs_diff(&tr.f_full_raw[..transfer_len], &tr.f_jc[..transfer_len]),
        max_state_infidelity_full_jc: state_inf,
        max_norm_defect: tr.norm_defect,
        fock_change,
        n_fock: p.n_fock,
        g: eff.g,
        omega_tq: eff.omega_tq,
        times,
        f_full: tr.f_full,
        f_jc: tr.f_jc,
        f_jc_ajc: tr.f_ajc,
    })
}

/// Derived-parameter summary written alongside drive runs.
#[derive(Clone, Debug, Serialize)]
pub struct DriveSummary {
    pub theta_star: f64,
    pub theta: f64,
    pub g0_over_2pi_mhz: f64,
    pub g_over_2pi_mhz: f64,
    pub g_prime_over_2pi_mhz: f64,
    pub omega_tq: f64,
    pub omega_tq_over_2pi_ghz: f64,
    pub omega_res: f64,
    pub vartheta: f64,
    pub beta_m: Vec<f64>,
    pub j1_two_beta2: f64,
    pub neglect_pass: bool,
    pub raw_smallness_max: f64,
}

pub fn summarize(p: &JunctionDriveParams) -> Result<DriveSummary, DriveError> {
    let eff = effective_params(p)?;
    let nc = neglect_condition(p)?;
    Ok(DriveSummary {
        theta_star: theta_star(),
        theta: eff.theta,
        g0_over_2pi_mhz: rad_per_ns_to_mhz(eff.g0),
        g_over_2pi_mhz: rad_per_ns_to_mhz(eff.g),
        g_prime_over_2pi_mhz: rad_per_ns_to_mhz(eff.g_prime),
        omega_tq: eff.omega_tq,
        omega_tq_over_2pi_ghz: rad_per_ns_to_mhz(eff.omega_tq) / 1e3,
        omega_res: eff.omega_res,
        vartheta: eff.vartheta,
        beta_m: nc.beta,
        j1_two_beta2: nc.j1_two_beta2,
        neglect_pass: nc.passes,
        raw_smallness_max: nc.max_smallness,
    })
}
