use faer::Mat;

use super::{eigvals_hermitian, Operator, QcoreError, C64};

/// Step-size contract for midpoint-exponential propagation.
///
/// The step obeys `scale · dt ≤ max_phase`, where `scale` is the larger of the
/// sampled spectral radius of `H(t)` and `frequency_bound`.
#[derive(Clone, Debug)]
pub struct StepPolicy {
    pub max_phase: f64,
    /// Requested step; rejected if it breaks the phase bound.
    pub dt: Option<f64>,
    /// Fastest explicit time dependence of `H(t)` (e.g. a drive frequency).
    pub frequency_bound: f64,
    /// Number of times at which the spectral radius is sampled.
    pub spectral_samples: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            max_phase: 0.05,
            dt: None,
            frequency_bound: 0.0,
            spectral_samples: 17,
        }
    }
}

impl StepPolicy {
    pub fn with_frequency_bound(mut self, f: f64) -> Self {
        self.frequency_bound = f;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    /// Resolves the step size for `H` on `[t0, t1]`.
    pub fn step_size<F>(&self, h: &F, t0: f64, t1: f64) -> Result<f64, QcoreError>
    where
        F: Fn(f64) -> Operator,
    {
        let n = self.spectral_samples.max(2);
        let mut radius = 0.0_f64;
        for k in 0..n {
            let t = t0 + (t1 - t0) * k as f64 / (n - 1) as f64;
            let vals = eigvals_hermitian(&h(t))?;
            let r = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            radius = radius.max(r);
        }
        let scale = radius.max(self.frequency_bound);
        let limit = if scale > 0.0 {
            self.max_phase / scale
        } else {
            f64::INFINITY
        };
        match self.dt {
            Some(dt) if dt * scale > self.max_phase * (1.0 + 1e-12) => Err(QcoreError::StepPolicy {
                phase: dt * scale,
                threshold: self.max_phase,
            }),
            Some(dt) => Ok(dt),
            None if limit.is_finite() => Ok(limit),
            None => Ok((t1 - t0).abs().max(f64::MIN_POSITIVE)),
        }
    }
}

/// `exp(−i H dt)` by Taylor series; intended for `‖H dt‖ ≲ 0.1`.
fn short_exp(h: &Mat<C64>, dt: f64) -> Mat<C64> {
    super::expm(&Mat::from_fn(h.nrows(), h.ncols(), |i, j| {
        h[(i, j)] * C64::new(0.0, -dt)
    }))
}

/// `exp(−i H dt) ψ` by Taylor series on the vector.
fn short_exp_apply(h: &Mat<C64>, dt: f64, psi: &[C64]) -> Vec<C64> {
    let d = psi.len();
    let mut out = psi.to_vec();
    let mut term = psi.to_vec();
    let mut next = vec![C64::new(0.0, 0.0); d];
    for k in 1..40 {
        let f = C64::new(0.0, -dt / k as f64);
        for v in next.iter_mut() {
            *v = C64::new(0.0, 0.0);
        }
        for j in 0..d {
            let tj = term[j];
            if tj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = h.col(j);
            for i in 0..d {
                next[i] += col[i] * tj;
            }
        }
        let mut size = 0.0;
        for i in 0..d {
            term[i] = next[i] * f;
            out[i] += term[i];
            size += term[i].norm_sqr();
        }
        if size < 1e-36 {
            break;
        }
    }
    out
}

fn uniform_steps(t0: f64, t1: f64, dt_max: f64) -> (usize, f64) {
    let span = t1 - t0;
    if span == 0.0 {
        return (0, 0.0);
    }
    let n = (span.abs() / dt_max).ceil().max(1.0) as usize;
    (n, span / n as f64)
}

/// Time-ordered propagator `U(t1, t0)` built from midpoint exponentials.
pub fn propagate<F>(h: F, t0: f64, t1: f64, policy: &StepPolicy) -> Result<Operator, QcoreError>
where
    F: Fn(f64) -> Operator,
{
    let dt_max = policy.step_size(&h, t0, t1)?;
    let (n, dt) = uniform_steps(t0, t1, dt_max);
    let h0 = h(t0);
    let space = h0.space().clone();
    let unit = h0.unit();
    let d = h0.dim();
    let mut u = Mat::<C64>::identity(d, d);
    for k in 0..n {
        let tm = t0 + (k as f64 + 0.5) * dt;
        let step = short_exp(h(tm).matrix(), dt);
        u = &step * &u;
    }
    Operator::new(space, u, unit)
}

/// Propagates a pure state and records it at each of `sample_times`.
///
/// Integration starts at `t0`; `sample_times` must be non-decreasing and `≥ t0`.
pub fn propagate_state<F>(
    h: F,
    psi0: &[C64],
    t0: f64,
    sample_times: &[f64],
    policy: &StepPolicy,
) -> Result<Vec<Vec<C64>>, QcoreError>
where
    F: Fn(f64) -> Operator,
{
    let t_end = sample_times.last().copied().unwrap_or(t0);
    let dt_max = policy.step_size(&h, t0, t_end.max(t0))?;
    let mut psi = psi0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(sample_times.len());
    for &ts in sample_times {
        if ts < t {
            return Err(QcoreError::InvalidArgument(format!(
                "sample times must be non-decreasing (got {ts} after {t})"
            )));
        }
        let (n, dt) = uniform_steps(t, ts, dt_max);
        for k in 0..n {
            let tm = t + (k as f64 + 0.5) * dt;
            psi = short_exp_apply(h(tm).matrix(), dt, &psi);
        }
        t = ts;
        out.push(psi.clone());
    }
    Ok(out)
}
