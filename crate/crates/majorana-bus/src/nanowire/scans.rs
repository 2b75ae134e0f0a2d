use rayon::prelude::*;
use serde::Serialize;

use super::{build_blocks, low_spectrum, NanowireError, NanowireParams};

/// One point of a Zeeman or length scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub h_mev: f64,
    pub length_nm: f64,
    pub eps1_mev: f64,
    pub eps2_mev: f64,
}

fn scan_point(params: &NanowireParams) -> Result<ScanRow, NanowireError> {
    let blocks = build_blocks(params, None)?;
    let low = low_spectrum(&blocks, false);
    Ok(ScanRow {
        h_mev: params.zeeman_h,
        length_nm: params.length_nm(),
        eps1_mev: low.epsilon_1,
        eps2_mev: low.epsilon_2,
    })
}

/// ε1, ε2 versus Zeeman splitting. `h_grid` must be sorted.
pub fn zeeman_scan(params: &NanowireParams, h_grid: &[f64]) -> Result<Vec<ScanRow>, NanowireError> {
    if h_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(NanowireError::InvalidParams("h grid must be sorted".into()));
    }
    h_grid
        .par_iter()
        .map(|&h| scan_point(&params.with_zeeman(h)))
        .collect()
}

/// Least-squares fit of `ε1 ≈ A exp(−L/(2ξ))` on the local maxima of ε1(L).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeFit {
    pub xi_nm: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation of (L, ln ε1) over the maxima (negative for a decaying envelope).
    pub correlation: f64,
    pub maxima: Vec<(f64, f64)>,
}

impl EnvelopeFit {
    /// Mean spacing of consecutive maxima (one oscillation period of ε1(L)).
    pub fn mean_period(&self) -> Option<f64> {
        if self.maxima.len() < 2 {
            return None;
        }
        let first = self.maxima.first()?.0;
        let last = self.maxima.last()?.0;
        Some((last - first) / (self.maxima.len() - 1) as f64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LengthScan {
    pub rows: Vec<ScanRow>,
    pub fit: EnvelopeFit,
}

/// Fits the decay envelope through 3-point local maxima of `(L, ε1)`.
pub fn fit_envelope(points: &[(f64, f64)]) -> Result<EnvelopeFit, NanowireError> {
    let maxima: Vec<(f64, f64)> = points
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1 && w[1].1 > 0.0)
        .map(|w| w[1])
        .collect();
    if maxima.len() < 3 {
        return Err(NanowireError::FitRefused(format!(
            "{} local maxima, need at least 3",
            maxima.len()
        )));
    }
    let n = maxima.len() as f64;
    let xs: Vec<f64> = maxima.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = maxima.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let correlation = sxy / (sxx * syy).sqrt();
    Ok(EnvelopeFit {
        xi_nm: -1.0 / (2.0 * slope),
        slope,
        intercept,
        correlation,
        maxima,
    })
}

/// ε1, ε2 versus wire length, plus the envelope fit. Lengths in nm.
pub fn length_scan(params: &NanowireParams, l_grid: &[f64]) -> Result<LengthScan, NanowireError> {
    if params.zeeman_h <= super::critical_field(params) {
        return Err(NanowireError::InvalidParams(format!(
            "h = {} meV is not above h_c = {} meV",
            params.zeeman_h,
            super::critical_field(params)
        )));
    }
    let rows: Vec<ScanRow> = l_grid
        .par_iter()
        .map(|&l| scan_point(&params.with_length_nm(l)))
        .collect::<Result<_, _>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.length_nm, r.eps1_mev)).collect();
    let fit = fit_envelope(&pts)?;
    Ok(LengthScan { rows, fit })
}
