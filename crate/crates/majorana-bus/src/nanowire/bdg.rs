use faer::Mat;

use super::{DisorderDraw, NanowireError, NanowireParams};
use crate::qcore::{EnergyUnit, HilbertSpace, Operator, C64};

/// 4×4 block in the per-site Nambu basis (c↑, c↓, c†↑, c†↓).
pub type Block4 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);

pub(crate) fn zero4() -> Block4 {
    [[ZERO; 4]; 4]
}

/// Block-tridiagonal form of the BdG matrix: `diag[i] = H[i,i]`, `upper[i] = H[i,i+1]`.
#[derive(Clone, Debug)]
pub struct BdgBlocks {
    pub diag: Vec<Block4>,
    pub upper: Vec<Block4>,
}

impl BdgBlocks {
    pub fn n_sites(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        4 * self.diag.len()
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let d = self.dim();
        let mut m = Mat::<C64>::zeros(d, d);
        for (i, b) in self.diag.iter().enumerate() {
            for r in 0..4 {
                for c in 0..4 {
                    m[(4 * i + r, 4 * i + c)] = b[r][c];
                }
            }
        }
        for (i, b) in self.upper.iter().enumerate() {
            for r in 0..4 {
                for c in 0..4 {
                    m[(4 * i + r, 4 * (i + 1) + c)] = b[r][c];
                    m[(4 * (i + 1) + c, 4 * i + r)] = b[r][c].conj();
                }
            }
        }
        m
    }

    /// `H ψ` without forming the dense matrix.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.n_sites();
        assert_eq!(psi.len(), 4 * n, "vector length");
        let mut out = vec![ZERO; 4 * n];
        for i in 0..n {
            for r in 0..4 {
                let mut s = ZERO;
                for c in 0..4 {
                    s += self.diag[i][r][c] * psi[4 * i + c];
                }
                if i + 1 < n {
                    for c in 0..4 {
                        s += self.upper[i][r][c] * psi[4 * (i + 1) + c];
                    }
                }
                if i > 0 {
                    for c in 0..4 {
                        s += self.upper[i - 1][c][r].conj() * psi[4 * (i - 1) + c];
                    }
                }
                out[4 * i + r] = s;
            }
        }
        out
    }

    /// Worst `max |ΣHΣ⁻¹ + H|` over all blocks.
    pub fn particle_hole_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for b in self.diag.iter().chain(self.upper.iter()) {
            let t = ph_conjugate_block(b);
            for r in 0..4 {
                for c in 0..4 {
                    worst = worst.max((t[r][c] + b[r][c]).norm());
                }
            }
        }
        worst
    }
}

/// `τx B* τx` for one 4×4 block.
pub(crate) fn ph_conjugate_block(b: &Block4) -> Block4 {
    const P: [usize; 4] = [2, 3, 0, 1];
    let mut out = zero4();
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = b[P[r]][P[c]].conj();
        }
    }
    out
}

fn nambu_block(h: [[C64; 2]; 2], d: [[C64; 2]; 2]) -> Block4 {
    // [[h, d], [d†, −h*]]
    let mut b = zero4();
    for r in 0..2 {
        for c in 0..2 {
            b[r][c] = h[r][c];
            b[r][c + 2] = d[r][c];
            b[r + 2][c] = d[c][r].conj();
            b[r + 2][c + 2] = -h[r][c].conj();
        }
    }
    b
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// On-site block of site `i`, optionally with disorder.
pub fn site_block(params: &NanowireParams, draw: Option<&DisorderDraw>, i: usize) -> Block4 {
    let t = params.hopping();
    let mut mu = params.mu_eff - 2.0 * t;
    let mut pairing = c(params.delta, 0.0);
    let mut field = [0.0; 3];
    match draw {
        Some(DisorderDraw::ChemicalPotential(v)) => mu += v[i],
        Some(DisorderDraw::PairingPhase(v)) => pairing = C64::from_polar(params.delta, v[i]),
        Some(DisorderDraw::NuclearZeeman(v)) => field = v[i],
        None => {}
    }
    let h = params.zeeman_h;
    let [bx, by, bz] = field;
    // −(μ_i ± h) on the diagonal plus b·σ
    let e = [
        [c(-mu - h + bz, 0.0), c(bx, -by)],
        [c(bx, by), c(-mu + h - bz, 0.0)],
    ];
    // Δ iσ_y
    let d = [[ZERO, pairing], [-pairing, ZERO]];
    nambu_block(e, d)
}

/// Hopping block `H[i, i+1]`: −t on the spin diagonal and λ·iσ_y.
pub fn hopping_block(params: &NanowireParams) -> Block4 {
    let t = params.hopping();
    let l = params.soc();
    let e = [[c(-t, 0.0), c(l, 0.0)], [c(-l, 0.0), c(-t, 0.0)]];
    let mut b = zero4();
    for r in 0..2 {
        for col in 0..2 {
            b[r][col] = e[r][col];
            b[r + 2][col + 2] = -e[r][col].conj();
        }
    }
    b
}

/// Block-tridiagonal BdG matrix.
pub fn build_blocks(params: &NanowireParams, draw: Option<&DisorderDraw>) -> Result<BdgBlocks, NanowireError> {
    params.validate()?;
    if let Some(d) = draw {
        if d.n_sites() != params.n_sites {
            return Err(NanowireError::InvalidDisorder(format!(
                "draw has {} sites, wire has {}",
                d.n_sites(),
                params.n_sites
            )));
        }
    }
    let diag = (0..params.n_sites).map(|i| site_block(params, draw, i)).collect();
    let hop = hopping_block(params);
    let upper = vec![hop; params.n_sites - 1];
    let blocks = BdgBlocks { diag, upper };
    let defect = blocks.particle_hole_defect();
    if defect > 1e-10 {
        return Err(NanowireError::SymmetryBroken(defect));
    }
    Ok(blocks)
}

/// Dense BdG Hamiltonian in meV, dimension `4·n_sites`.
pub fn build_bdg(params: &NanowireParams, draw: Option<&DisorderDraw>) -> Result<Operator, NanowireError> {
    let blocks = build_blocks(params, draw)?;
    let space = HilbertSpace::new(vec![params.n_sites, 4]).map_err(NanowireError::Core)?;
    Operator::new(space, blocks.to_dense(), EnergyUnit::MilliElectronVolt).map_err(NanowireError::Core)
}

/// Particle-hole antiunitary Σ = τx K acting site by site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParticleHole {
    pub n_sites: usize,
}

impl ParticleHole {
    pub fn new(n_sites: usize) -> Self {
        Self { n_sites }
    }

    /// `Σψ`: swaps particle and hole components and conjugates.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        assert_eq!(psi.len(), 4 * self.n_sites, "vector length");
        let mut out = vec![ZERO; psi.len()];
        for i in 0..self.n_sites {
            let b = 4 * i;
            out[b] = psi[b + 2].conj();
            out[b + 1] = psi[b + 3].conj();
            out[b + 2] = psi[b].conj();
            out[b + 3] = psi[b + 1].conj();
        }
        out
    }

    /// `ΣHΣ⁻¹` for a dense operator.
    pub fn conjugate(&self, h: &Mat<C64>) -> Mat<C64> {
        let p = |k: usize| (k & !3) | ((k & 3) ^ 2);
        Mat::from_fn(h.nrows(), h.ncols(), |i, j| h[(p(i), p(j))].conj())
    }

    /// `max |ΣHΣ⁻¹ + H|`.
    pub fn anticommutation_defect(&self, h: &Mat<C64>) -> f64 {
        let t = self.conjugate(h);
        let mut worst = 0.0_f64;
        for j in 0..h.ncols() {
            for i in 0..h.nrows() {
                worst = worst.max((t[(i, j)] + h[(i, j)]).norm());
            }
        }
        worst
    }
}

/// Per-site weights `Σ_c |ψ_{4i+c}|²`.
pub fn site_weights(psi: &[C64]) -> Vec<f64> {
    psi.chunks(4).map(|b| b.iter().map(|x| x.norm_sqr()).sum()).collect()
}
