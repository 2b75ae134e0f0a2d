use faer::Mat;

use super::{eig_hermitian_matrix, Operator, QcoreError, C64};

fn norm_one(m: &Mat<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential of a general square matrix (scaling and squaring with Taylor).
pub fn expm(m: &Mat<C64>) -> Mat<C64> {
    let d = m.nrows();
    assert_eq!(d, m.ncols(), "expm needs a square matrix");
    let norm = norm_one(m);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5_f64.powi(squarings);
    let a = Mat::from_fn(d, d, |i, j| m[(i, j)] * scale);

    let mut result = Mat::<C64>::identity(d, d);
    let mut term = Mat::<C64>::identity(d, d);
    for k in 1..=30 {
        term = &term * &a;
        let inv = 1.0 / k as f64;
        term = Mat::from_fn(d, d, |i, j| term[(i, j)] * inv);
        result = &result + &term;
        if norm_one(&term) < 1e-18 * norm_one(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `exp(−i H t)` for Hermitian `H`, through its eigendecomposition.
pub fn exp_hermitian(h: &Operator, t: f64) -> Result<Operator, QcoreError> {
    let eig = eig_hermitian_matrix(h.matrix())?;
    let u = eig.map(|l| C64::from_polar(1.0, -l * t));
    Operator::new(h.space().clone(), u, h.unit())
}
