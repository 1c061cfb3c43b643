use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::StatsError;

/// Relative threshold on the diagonal of R below which a column is treated
/// as linearly dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsResult {
    /// Intercept first when one was requested, then one per predictor.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub intercept: bool,
}

/// Least squares through a Householder QR factorization.
///
/// `x` holds one row of predictor values per observation. Without an
/// intercept, R² is the uncentered coefficient of determination.
pub fn ols_regression(x: &[Vec<f64>], y: &[f64], intercept: bool) -> Result<OlsResult, StatsError> {
    let n = y.len();
    if x.len() != n {
        return Err(StatsError::LengthMismatch { left: x.len(), right: n });
    }
    let k = x.first().map_or(0, |r| r.len());
    if x.iter().any(|r| r.len() != k) {
        return Err(StatsError::RankDeficient);
    }
    let p = k + intercept as usize;
    if p == 0 {
        return Err(StatsError::RankDeficient);
    }
    if n <= p {
        return Err(StatsError::TooFewSamples { n });
    }
    if y.iter().chain(x.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let a = DMatrix::from_fn(n, p, |i, j| {
        if intercept {
            if j == 0 { 1.0 } else { x[i][j - 1] }
        } else {
            x[i][j]
        }
    });
    let b = DVector::from_column_slice(y);

    let qr = a.clone().qr();
    let r = qr.r();
    let scale = (0..p).map(|j| a.column(j).norm()).fold(0.0, f64::max);
    if (0..p).any(|j| r[(j, j)].abs() <= RANK_TOL * scale.max(f64::MIN_POSITIVE)) {
        return Err(StatsError::RankDeficient);
    }
    let qtb = qr.q().transpose() * &b;
    let beta = r
        .solve_upper_triangular(&qtb)
        .ok_or(StatsError::RankDeficient)?;

    let fitted = &a * &beta;
    let residuals: Vec<f64> = (&b - &fitted).iter().copied().collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let tss: f64 = if intercept {
        let m = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - m) * (v - m)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };

    let dof = (n - p) as f64;
    let sigma2 = rss / dof;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(StatsError::RankDeficient)?;
    let cov_diag: Vec<f64> = (0..p).map(|j| r_inv.row(j).norm_squared() * sigma2).collect();
    let dist = StudentsT::new(0.0, 1.0, dof).expect("positive dof");
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let std_errors: Vec<f64> = cov_diag.iter().map(|v| v.sqrt()).collect();
    let t_values: Vec<f64> = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(c, se)| if *se > 0.0 { c / se } else { f64::INFINITY.copysign(*c) })
        .collect();
    let p_values = t_values
        .iter()
        .map(|t| {
            if t.is_finite() {
                (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(OlsResult {
        coefficients,
        std_errors,
        t_values,
        p_values,
        r_squared,
        residuals,
        intercept,
    })
}
