//! Scaling-law fits and rank correlation over sweep results.

use std::collections::BTreeMap;

use crate::error::{HarnessError, Result};
use crate::sweep::ResultRow;

/// Grid coordinate a fit is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum XField {
    /// Trajectory length `N`.
    Steps,
    Sigma,
    /// Ambient dimension `n`.
    N,
    K,
}

impl XField {
    fn of(self, r: &ResultRow) -> f64 {
        match self {
            Self::Steps => r.steps as f64,
            Self::Sigma => r.sigma,
            Self::N => r.n as f64,
            Self::K => r.k as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
}

/// Mean error for each distinct `x`, ascending in `x`. Failed trials are
/// left out of the means.
pub fn mean_errors(rows: &[ResultRow], x: XField) -> Vec<(f64, f64)> {
    let mut groups: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let Some(e) = r.error else { continue };
        let xv = x.of(r);
        // total order on the nonnegative grid values
        let g = groups.entry(xv.to_bits()).or_insert((xv, 0.0, 0));
        g.1 += e;
        g.2 += 1;
    }
    let mut out: Vec<(f64, f64)> = groups.into_values().map(|(xv, s, c)| (xv, s / c as f64)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Least-squares slope of `log(mean error)` against `log(x)`.
pub fn fit_slope(rows: &[ResultRow], x: XField) -> Result<SlopeFit> {
    let means = mean_errors(rows, x);
    let (xs, ys): (Vec<f64>, Vec<f64>) = means.into_iter().unzip();
    fit_log_log(&xs, &ys)
}

/// Least-squares slope of `log y` against `log x`, with its standard error.
pub fn fit_log_log(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 || xs.len() != ys.len() {
        return Err(HarnessError::InsufficientData(distinct.len()));
    }
    if let Some(&bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(HarnessError::NonPositive(bad));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = (ssr / (m - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, stderr })
}

/// Spearman rank correlation, with tied values given their mean rank.
/// `None` when fewer than two pairs or when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            out[t] = rank;
        }
        i = j + 1;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let m = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / m, b.iter().sum::<f64>() / m);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}
