//! Local projections.
//!
//! For each horizon `h` the outcome `y_{t+h}` is regressed on an intercept,
//! the shock `u_t`, `L` lags of `y` and `L` lags of `u`. Sample membership is
//! decided at the shock date `t`; the outcome may leave the sample region.
//! Lagged controls are read from the full series, and a row is dropped if
//! any regressor or the outcome is missing.

use nalgebra::{DMatrix, DVector};

use crate::econometrics::hac::hac_variance_of;
use crate::econometrics::irf::{IrfMetadata, IrfRow, IrfTable};
use crate::econometrics::ols::ols;
use crate::econometrics::shock::ShockSeries;
use crate::error::{Error, Result};
use crate::series::{MonthIndex, MonthlySeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpConfig {
    /// Largest horizon `H`; rows cover `0..=H`.
    pub horizon: usize,
    /// Lag order `L` for both controls.
    pub lags: usize,
    /// Newey–West maximum lag for the standard errors.
    pub hac_lag: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            horizon: 24,
            lags: 12,
            hac_lag: 12,
        }
    }
}

pub fn local_projection<F>(
    y: &MonthlySeries,
    shock: &ShockSeries,
    cfg: &LpConfig,
    sample: F,
) -> Result<IrfTable>
where
    F: Fn(MonthIndex) -> bool,
{
    let lags = cfg.lags;
    let k = 2 * lags + 2;
    let u = &shock.values;
    let u_at = |m: MonthIndex| u.get(m);

    // Rows with shock, sample membership and complete lags; the outcome
    // availability is horizon-specific and checked below.
    let base_rows: Vec<usize> = (0..y.len())
        .filter(|&i| {
            let m = y.month_at(i);
            sample(m)
                && u_at(m).is_some()
                && (1..=lags).all(|j| {
                    y.at(i as i64 - j as i64).is_some() && u_at(m.offset(-(j as i64))).is_some()
                })
        })
        .collect();

    let mut rows = Vec::with_capacity(cfg.horizon + 1);
    for h in 0..=cfg.horizon {
        let used: Vec<usize> = base_rows
            .iter()
            .copied()
            .filter(|&i| y.at((i + h) as i64).is_some())
            .collect();
        let n = used.len();
        if n <= k {
            return Err(Error::HorizonSample { h, needed: k, got: n });
        }
        let design = DMatrix::from_fn(n, k, |r, c| {
            let i = used[r] as i64;
            let m = y.month_at(used[r]);
            match c {
                0 => 1.0,
                1 => u_at(m).unwrap(),
                c if c < 2 + lags => y.at(i - (c as i64 - 1)).unwrap(),
                c => u_at(m.offset(-((c - 1 - lags) as i64))).unwrap(),
            }
        });
        let outcome = DVector::from_iterator(n, used.iter().map(|&i| y.at((i + h) as i64).unwrap()));
        let (lo, hi) = outcome
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if lo == hi {
            return Err(Error::ZeroVarianceOutcome);
        }
        let fit = ols(&design, &outcome)?;
        let contrast = fit.xtx_inverse.column(1).into_owned();
        let var = hac_variance_of(&design, &fit.residuals, &contrast, cfg.hac_lag)?;
        rows.push(IrfRow::new(h, fit.coefficients[1], var.max(0.0).sqrt(), n));
    }

    Ok(IrfTable {
        rows,
        meta: IrfMetadata {
            phase: shock.phase_label.clone().unwrap_or_else(|| "all".into()),
            shock: shock.definition.to_string(),
            response: "y".into(),
            horizon: cfg.horizon,
            lags: cfg.lags,
            extra: Vec::new(),
        },
    })
}
