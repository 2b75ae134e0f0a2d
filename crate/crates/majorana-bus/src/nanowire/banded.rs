//! Low-lying BdG eigenpairs from the block-tridiagonal structure:
//! inertia counts by block LDL†, bisection, and inverse iteration.

use super::bdg::{zero4, BdgBlocks, Block4};
use crate::qcore::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Factorization of a Hermitian 4×4 block, exposing inertia and solves.
enum Herm4 {
    Ldl { l: Block4, d: [f64; 4] },
    Eig { vals: [f64; 4], vecs: Block4 },
}

impl Herm4 {
    fn new(m: &Block4, pivmin: f64) -> Herm4 {
        let scale = m.iter().flatten().fold(0.0_f64, |s, x| s.max(x.norm())).max(pivmin);
        let mut l = zero4();
        let mut d = [0.0; 4];
        let mut ok = true;
        for k in 0..4 {
            let mut dk = m[k][k].re;
            for j in 0..k {
                dk -= l[k][j].norm_sqr() * d[j];
            }
            if dk.abs() < 1e-8 * scale {
                ok = false;
                break;
            }
            d[k] = dk;
            l[k][k] = C64::new(1.0, 0.0);
            for i in k + 1..4 {
                let mut s = m[i][k];
                for j in 0..k {
                    s -= l[i][j] * l[k][j].conj() * d[j];
                }
                l[i][k] = s / dk;
            }
        }
        if ok {
            return Herm4::Ldl { l, d };
        }
        let (mut vals, vecs) = jacobi4(m);
        for v in vals.iter_mut() {
            if v.abs() < pivmin {
                *v = -pivmin;
            }
        }
        Herm4::Eig { vals, vecs }
    }

    fn negatives(&self) -> usize {
        match self {
            Herm4::Ldl { d, .. } => d.iter().filter(|&&x| x < 0.0).count(),
            Herm4::Eig { vals, .. } => vals.iter().filter(|&&x| x < 0.0).count(),
        }
    }

    fn solve(&self, y: &[C64; 4]) -> [C64; 4] {
        match self {
            Herm4::Ldl { l, d } => {
                let mut z = *y;
                for i in 0..4 {
                    for j in 0..i {
                        let lz = l[i][j] * z[j];
                        z[i] -= lz;
                    }
                }
                for i in 0..4 {
                    z[i] /= d[i];
                }
                for i in (0..4).rev() {
                    for j in i + 1..4 {
                        let lz = l[j][i].conj() * z[j];
                        z[i] -= lz;
                    }
                }
                z
            }
            Herm4::Eig { vals, vecs } => {
                let mut out = [ZERO; 4];
                for k in 0..4 {
                    let mut p = ZERO;
                    for i in 0..4 {
                        p += vecs[i][k].conj() * y[i];
                    }
                    p /= vals[k];
                    for i in 0..4 {
                        out[i] += vecs[i][k] * p;
                    }
                }
                out
            }
        }
    }

    /// `D⁻¹ B` for a 4×4 `B`.
    fn solve_block(&self, b: &Block4) -> Block4 {
        let mut out = zero4();
        for c in 0..4 {
            let col = [b[0][c], b[1][c], b[2][c], b[3][c]];
            let x = self.solve(&col);
            for r in 0..4 {
                out[r][c] = x[r];
            }
        }
        out
    }
}

/// Cyclic Jacobi eigendecomposition of a Hermitian 4×4 matrix.
fn jacobi4(m: &Block4) -> ([f64; 4], Block4) {
    let mut a = *m;
    let mut v = zero4();
    for i in 0..4 {
        v[i][i] = C64::new(1.0, 0.0);
    }
    for _sweep in 0..50 {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].norm_sqr())
            .sum();
        let diag: f64 = (0..4).map(|i| a[i][i].re * a[i][i].re).sum();
        if off <= 1e-32 * diag.max(1e-300) {
            break;
        }
        for p in 0..3 {
            for q in p + 1..4 {
                let apq = a[p][q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // W = diag phase on q, then a real rotation in (p, q)
                let ph = apq / r;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // W = diag(1, ph*) · [[c, s], [−s, c]] on (p, q)
                let wpp = C64::new(cs, 0.0);
                let wpq = C64::new(sn, 0.0);
                let wqp = -ph.conj() * sn;
                let wqq = ph.conj() * cs;
                // A ← A W (columns p, q)
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = akp * wpp + akq * wqp;
                    a[k][q] = akp * wpq + akq * wqq;
                }
                // A ← W† A (rows p, q)
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = wpp.conj() * apk + wqp.conj() * aqk;
                    a[q][k] = wpq.conj() * apk + wqq.conj() * aqk;
                }
                a[p][q] = ZERO;
                a[q][p] = ZERO;
                for k in 0..4 {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = vkp * wpp + vkq * wqp;
                    v[k][q] = vkp * wpq + vkq * wqq;
                }
            }
        }
    }
    ([a[0][0].re, a[1][1].re, a[2][2].re, a[3][3].re], v)
}

fn sub_shift(b: &Block4, sigma: f64) -> Block4 {
    let mut out = *b;
    for i in 0..4 {
        out[i][i] -= sigma;
    }
    out
}

/// `B† X` for 4×4 blocks.
fn adj_mul(b: &Block4, x: &Block4) -> Block4 {
    let mut out = zero4();
    for r in 0..4 {
        for c in 0..4 {
            let mut s = ZERO;
            for k in 0..4 {
                s += b[k][r].conj() * x[k][c];
            }
            out[r][c] = s;
        }
    }
    out
}

fn sub_block(a: &Block4, b: &Block4) -> Block4 {
    let mut out = *a;
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] -= b[r][c];
        }
    }
    out
}

/// Eigenvalue search on a block-tridiagonal Hermitian matrix.
pub struct BandSolver<'a> {
    blocks: &'a BdgBlocks,
    pivmin: f64,
    /// Gershgorin bound on the spectral radius.
    bound: f64,
}

impl<'a> BandSolver<'a> {
    pub fn new(blocks: &'a BdgBlocks) -> Self {
        let n = blocks.n_sites();
        let mut bound = 0.0_f64;
        for i in 0..n {
            for r in 0..4 {
                let mut s: f64 = (0..4).map(|c| blocks.diag[i][r][c].norm()).sum();
                if i + 1 < n {
                    s += (0..4).map(|c| blocks.upper[i][r][c].norm()).sum::<f64>();
                }
                if i > 0 {
                    s += (0..4).map(|c| blocks.upper[i - 1][c][r].norm()).sum::<f64>();
                }
                bound = bound.max(s);
            }
        }
        Self {
            blocks,
            pivmin: f64::MIN_POSITIVE.sqrt() * bound.max(1.0),
            bound,
        }
    }

    pub fn spectral_bound(&self) -> f64 {
        self.bound
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia).
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.blocks.n_sites();
        let mut count = 0;
        let mut m = sub_shift(&self.blocks.diag[0], sigma);
        for i in 0..n {
            let f = Herm4::new(&m, self.pivmin);
            count += f.negatives();
            if i + 1 < n {
                let x = f.solve_block(&self.blocks.upper[i]);
                let s = adj_mul(&self.blocks.upper[i], &x);
                m = sub_block(&sub_shift(&self.blocks.diag[i + 1], sigma), &s);
            }
        }
        count
    }

    /// The `k`-th eigenvalue (0-based, ascending) by bisection to absolute `tol`.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> f64 {
        let mut lo = -self.bound - 1.0;
        let mut hi = self.bound + 1.0;
        self.bisect(k, &mut lo, &mut hi, tol)
    }

    fn bisect(&self, k: usize, lo: &mut f64, hi: &mut f64, tol: f64) -> f64 {
        while *hi - *lo > tol {
            let mid = 0.5 * (*lo + *hi);
            if mid <= *lo || mid >= *hi {
                break;
            }
            if self.count_below(mid) > k {
                *hi = mid;
            } else {
                *lo = mid;
            }
        }
        0.5 * (*lo + *hi)
    }

    /// Eigenvalues with indices `k0..k0+count`, sharing bisection brackets.
    pub fn eigenvalues(&self, k0: usize, count: usize, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let mut lower = lo;
        for k in k0..k0 + count {
            let mut l = lower;
            let mut h = hi;
            let v = self.bisect(k, &mut l, &mut h, tol);
            out.push(v);
            lower = l;
        }
        out
    }

    /// Solves `(H − σ) x = b` by block LDL†.
    pub fn solve_shifted(&self, sigma: f64, b: &[C64]) -> Vec<C64> {
        let n = self.blocks.n_sites();
        let mut facs = Vec::with_capacity(n);
        let mut m = sub_shift(&self.blocks.diag[0], sigma);
        // forward: y_{i+1} = b_{i+1} − B_i† D_i⁻¹ y_i
        let mut y: Vec<[C64; 4]> = b.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
        for i in 0..n {
            let f = Herm4::new(&m, self.pivmin);
            if i + 1 < n {
                let x = f.solve_block(&self.blocks.upper[i]);
                let s = adj_mul(&self.blocks.upper[i], &x);
                m = sub_block(&sub_shift(&self.blocks.diag[i + 1], sigma), &s);
                let dy = f.solve(&y[i]);
                let up = &self.blocks.upper[i];
                for r in 0..4 {
                    let mut acc = ZERO;
                    for k in 0..4 {
                        acc += up[k][r].conj() * dy[k];
                    }
                    y[i + 1][r] -= acc;
                }
            }
            facs.push(f);
        }
        // backward: x_i = D_i⁻¹ (y_i − B_i x_{i+1})
        let mut x = vec![[ZERO; 4]; n];
        for i in (0..n).rev() {
            let mut rhs = y[i];
            if i + 1 < n {
                let up = &self.blocks.upper[i];
                for r in 0..4 {
                    for k in 0..4 {
                        rhs[r] -= up[r][k] * x[i + 1][k];
                    }
                }
            }
            x[i] = facs[i].solve(&rhs);
        }
        x.into_iter().flatten().collect()
    }

    /// Eigenvector for an isolated eigenvalue `value` by inverse iteration,
    /// with the Rayleigh quotient and residual norm.
    pub fn eigenvector(&self, value: f64) -> (Vec<C64>, f64, f64) {
        let d = self.blocks.dim();
        let mut v: Vec<C64> = (0..d)
            .map(|i| C64::new(1.0 + 0.37 * ((i * 7919) % 97) as f64 / 97.0, 0.11 * ((i * 104729) % 89) as f64 / 89.0))
            .collect();
        normalize(&mut v);
        for _ in 0..4 {
            v = self.solve_shifted(value, &v);
            normalize(&mut v);
        }
        let hv = self.blocks.apply(&v);
        let rq: f64 = v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum();
        let res = hv
            .iter()
            .zip(&v)
            .map(|(h, x)| (h - x * rq).norm_sqr())
            .sum::<f64>()
            .sqrt();
        (v, rq, res)
    }
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}
