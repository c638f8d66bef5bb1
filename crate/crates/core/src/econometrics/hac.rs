//! Newey–West HAC covariance with Bartlett weights.
//!
//! `V = (X'X)^-1 S (X'X)^-1` with `S = sum_{|j|<=L} w_j Gamma_j`,
//! `w_j = 1 - |j|/(L+1)` and `Gamma_j = sum_t v_t v_{t-j}'`, `v_t = x_t e_t`.
//! No small-sample degrees-of-freedom correction is applied. Lags run over
//! row order of the design.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn bartlett_weight(lag: usize, max_lag: usize) -> f64 {
    if lag > max_lag {
        0.0
    } else {
        1.0 - lag as f64 / (max_lag as f64 + 1.0)
    }
}

/// Full HAC covariance matrix of the coefficients of `ols(x, _)` whose
/// residuals are `residuals`.
pub fn hac_covariance(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    max_lag: usize,
) -> Result<DMatrix<f64>> {
    let bread = crate::econometrics::ols::xtx_inverse(x)?;
    hac_covariance_with_bread(x, residuals, &bread, max_lag)
}

/// As [`hac_covariance`] with a precomputed `(X'X)^-1`.
pub fn hac_covariance_with_bread(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    bread: &DMatrix<f64>,
    max_lag: usize,
) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    check_lag(n, residuals.len(), max_lag)?;
    let mut scores = x.clone();
    for (mut row, e) in scores.row_iter_mut().zip(residuals.iter()) {
        row *= *e;
    }
    let mut meat = scores.transpose() * &scores;
    for j in 1..=max_lag {
        let w = bartlett_weight(j, max_lag);
        let gamma = scores.rows(j, n - j).transpose() * scores.rows(0, n - j);
        meat += (&gamma + gamma.transpose()) * w;
    }
    let mut v = bread * meat * bread;
    // exact symmetry
    let v_t = v.transpose();
    v = (v + v_t) * 0.5;
    Ok(v)
}

/// HAC variance of the single linear combination `c' beta`, where
/// `contrast = (X'X)^-1 c`. Equivalent to `c' V c` for the full matrix but
/// costs O(n (k + L)).
pub fn hac_variance_of(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    contrast: &DVector<f64>,
    max_lag: usize,
) -> Result<f64> {
    let n = x.nrows();
    check_lag(n, residuals.len(), max_lag)?;
    let z: Vec<f64> = (x * contrast)
        .iter()
        .zip(residuals.iter())
        .map(|(a, e)| a * e)
        .collect();
    let mut var: f64 = z.iter().map(|v| v * v).sum();
    for j in 1..=max_lag {
        let w = bartlett_weight(j, max_lag);
        let g: f64 = z[j..].iter().zip(&z[..n - j]).map(|(a, b)| a * b).sum();
        var += 2.0 * w * g;
    }
    Ok(var)
}

fn check_lag(n: usize, n_resid: usize, max_lag: usize) -> Result<()> {
    if n_resid != n {
        return Err(Error::Domain(format!(
            "design has {n} rows but {n_resid} residuals"
        )));
    }
    if max_lag >= n {
        return Err(Error::Domain(format!(
            "HAC lag {max_lag} must be below the sample size {n}"
        )));
    }
    Ok(())
}
