//! Unexpected base-growth shocks: AR residuals and detrended residuals
//! computed inside phase segments.
//!
//! A regression row at month `t` is usable only if `t` and all of its lags
//! lie in the same contiguous segment and are defined. Rows that would
//! reach across a gap between segments are dropped, never spliced.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::econometrics::ols::ols;
use crate::error::{Error, Result};
use crate::series::{MonthIndex, MonthlySeries};

/// Inclusive month range.
pub type Segment = (MonthIndex, MonthIndex);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShockDefinition {
    /// Residual of an AR(p) with intercept.
    ArResid { p: usize },
    /// Residual of a regression on intercept, linear trend and `lags` own lags.
    Detrended { lags: usize },
}

impl fmt::Display for ShockDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShockDefinition::ArResid { p } => write!(f, "ar_resid({p})"),
            ShockDefinition::Detrended { lags } => write!(f, "detrended({lags})"),
        }
    }
}

impl FromStr for ShockDefinition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("unknown shock definition `{s}`"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let n: usize = rest.strip_suffix(')').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        match name {
            "ar_resid" => Ok(ShockDefinition::ArResid { p: n }),
            "detrended" => Ok(ShockDefinition::Detrended { lags: n }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockSeries {
    pub values: MonthlySeries,
    pub definition: ShockDefinition,
    pub phase_label: Option<String>,
    pub standardized: bool,
}

impl ShockSeries {
    pub fn with_phase(mut self, label: impl Into<String>) -> Self {
        self.phase_label = Some(label.into());
        self
    }
}

/// Fits `x_t = a_0 + sum_i a_i x_{t-i} + u_t` on usable rows of `segments`.
///
/// Returns `[a_0, a_1, .., a_p]` and the unstandardized residuals, which are
/// missing outside usable rows. An empty `segments` slice means the whole
/// range of `x`.
pub fn ar_fit(x: &MonthlySeries, p: usize, segments: &[Segment]) -> Result<(Vec<f64>, ShockSeries)> {
    let (coef, resid) = residualize(x, p, segments, false)?;
    Ok((
        coef,
        ShockSeries {
            values: resid,
            definition: ShockDefinition::ArResid { p },
            phase_label: None,
            standardized: false,
        },
    ))
}

/// Residual of `x_t` on intercept, a linear trend and `lags` own lags.
pub fn detrended_shock(x: &MonthlySeries, lags: usize, segments: &[Segment]) -> Result<ShockSeries> {
    let (_, resid) = residualize(x, lags, segments, true)?;
    Ok(ShockSeries {
        values: resid,
        definition: ShockDefinition::Detrended { lags },
        phase_label: None,
        standardized: false,
    })
}

/// Dispatches on the definition.
pub fn build_shock(x: &MonthlySeries, definition: ShockDefinition, segments: &[Segment]) -> Result<ShockSeries> {
    match definition {
        ShockDefinition::ArResid { p } => ar_fit(x, p, segments).map(|(_, s)| s),
        ShockDefinition::Detrended { lags } => detrended_shock(x, lags, segments),
    }
}

fn residualize(
    x: &MonthlySeries,
    lags: usize,
    segments: &[Segment],
    trend: bool,
) -> Result<(Vec<f64>, MonthlySeries)> {
    let whole = [(x.start(), x.end())];
    let segments = if segments.is_empty() { &whole[..] } else { segments };

    let mut rows: Vec<usize> = Vec::new();
    for &(from, to) in segments {
        let lo = from.months_since(x.start()).max(0);
        let hi = to.months_since(x.start()).min(x.len() as i64 - 1);
        let mut t = lo + lags as i64;
        while t <= hi {
            if (0..=lags as i64).all(|i| x.at(t - i).is_some()) {
                rows.push(t as usize);
            }
            t += 1;
        }
    }
    let k = 1 + lags + usize::from(trend);
    if rows.len() <= k {
        return Err(Error::SampleSize {
            context: format!("autoregression with {lags} lags"),
            needed: k,
            got: rows.len(),
        });
    }

    let design = DMatrix::from_fn(rows.len(), k, |r, c| {
        let t = rows[r] as i64;
        match (c, trend) {
            (0, _) => 1.0,
            (1, true) => t as f64,
            (c, true) => x.at(t - (c as i64 - 1)).unwrap(),
            (c, false) => x.at(t - c as i64).unwrap(),
        }
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&t| x.at(t as i64).unwrap()));
    let fit = ols(&design, &y)?;

    let mut values = vec![None; x.len()];
    for (r, &t) in rows.iter().enumerate() {
        values[t] = Some(fit.residuals[r]);
    }
    Ok((fit.coefficients.iter().copied().collect(), MonthlySeries::new(x.start(), values)?))
}

/// Divides by the sample standard deviation (denominator n - 1). The mean is
/// left untouched.
pub fn standardize(shock: &ShockSeries) -> Result<ShockSeries> {
    let vals: Vec<f64> = shock.values.defined().map(|(_, v)| v).collect();
    if vals.len() < 2 {
        return Err(Error::DegenerateShock);
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::DegenerateShock);
    }
    Ok(ShockSeries {
        values: shock.values.map(|v| v / sd)?,
        standardized: true,
        ..shock.clone()
    })
}

/// Overlays shocks with disjoint support onto one series spanning the union
/// of their ranges.
pub fn combine_shocks(parts: &[ShockSeries]) -> Result<ShockSeries> {
    let first = parts.first().ok_or(Error::EmptyInput)?;
    let start = parts.iter().map(|p| p.values.start()).min().unwrap();
    let end = parts.iter().map(|p| p.values.end()).max().unwrap();
    let mut values = vec![None; end.months_since(start) as usize + 1];
    for part in parts {
        for (m, v) in part.values.defined() {
            let slot = &mut values[m.months_since(start) as usize];
            if slot.is_some() {
                return Err(Error::Alignment(format!("shock parts overlap at {m}")));
            }
            *slot = Some(v);
        }
    }
    Ok(ShockSeries {
        values: MonthlySeries::new(start, values)?,
        definition: first.definition,
        phase_label: None,
        standardized: parts.iter().all(|p| p.standardized),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn start() -> MonthIndex {
        MonthIndex::new(1970, 1).unwrap()
    }

    fn ar1(n: usize, a: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![0.0; n];
        for t in 1..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[t] = a * x[t - 1] + e;
        }
        x
    }

    #[test]
    fn recovers_ar1_coefficient() {
        let x = MonthlySeries::from_values(start(), &ar1(2000, 0.5, 1)).unwrap();
        let (coef, shock) = ar_fit(&x, 1, &[]).unwrap();
        assert!((coef[1] - 0.5).abs() < 0.05, "{coef:?}");
        assert_eq!(shock.values.defined_count(), 1999);
        assert!(!shock.standardized);
    }

    #[test]
    fn deterministic_ramp_has_zero_residuals() {
        let v: Vec<f64> = (0..40).map(|t| t as f64).collect();
        let x = MonthlySeries::from_values(start(), &v).unwrap();
        // x_t = x_{t-1} + 1 is collinear with the intercept only through the
        // lag; the fit is exact.
        let (coef, shock) = ar_fit(&x, 1, &[]).unwrap();
        assert!((coef[0] - 1.0).abs() < 1e-10 && (coef[1] - 1.0).abs() < 1e-10);
        assert!(shock.values.defined().all(|(_, r)| r.abs() < 1e-10));
    }

    #[test]
    fn white_noise_ar12() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = MonthlySeries::from_values(start(), &v).unwrap();
        let (coef, shock) = ar_fit(&x, 12, &[]).unwrap();
        assert!(coef[1..].iter().all(|a| a.abs() < 0.05), "{coef:?}");
        let r: Vec<f64> = shock.values.defined().map(|(_, v)| v).collect();
        let var = r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64;
        assert!((var - 1.0).abs() < 0.1);
    }

    #[test]
    fn rows_never_cross_segment_gaps() {
        let v = ar1(100, 0.3, 3);
        let x = MonthlySeries::from_values(start(), &v).unwrap();
        let segs = [(start(), start().offset(29)), (start().offset(60), start().offset(99))];
        let (_, shock) = ar_fit(&x, 2, &segs).unwrap();
        let defined: Vec<i64> = shock
            .values
            .defined()
            .map(|(m, _)| m.months_since(start()))
            .collect();
        let want: Vec<i64> = (2..30).chain(62..100).collect();
        assert_eq!(defined, want);
    }

    #[test]
    fn too_few_rows() {
        let x = MonthlySeries::from_values(start(), &[1.0, 2.0, 4.0, 3.0]).unwrap();
        assert!(matches!(ar_fit(&x, 3, &[]), Err(Error::SampleSize { .. })));
    }

    #[test]
    fn missing_values_drop_rows() {
        let mut v: Vec<Option<f64>> = ar1(50, 0.2, 9).into_iter().map(Some).collect();
        v[20] = None;
        let x = MonthlySeries::new(start(), v).unwrap();
        let (_, shock) = ar_fit(&x, 2, &[]).unwrap();
        for t in 20..=22 {
            assert_eq!(shock.values.at(t), None);
        }
        assert!(shock.values.at(23).is_some());
    }

    #[test]
    fn trend_is_absorbed() {
        let v: Vec<f64> = (0..60).map(|t| 3.0 + 0.1 * t as f64).collect();
        let x = MonthlySeries::from_values(start(), &v).unwrap();
        let s = detrended_shock(&x, 0, &[]).unwrap();
        assert!(s.values.defined().all(|(_, r)| r.abs() < 1e-10));
    }

    #[test]
    fn detrending_reduces_variance() {
        let v: Vec<f64> = ar1(600, 0.6, 4)
            .iter()
            .enumerate()
            .map(|(t, e)| e + 0.05 * t as f64)
            .collect();
        let var = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
        };
        let x = MonthlySeries::from_values(start(), &v).unwrap();
        let s = detrended_shock(&x, 1, &[]).unwrap();
        let r: Vec<f64> = s.values.defined().map(|(_, v)| v).collect();
        assert!(var(&r) < var(&v));
    }

    #[test]
    fn detrended_with_lags_tracks_ar_residuals() {
        let x = MonthlySeries::from_values(start(), &ar1(1500, 0.5, 5)).unwrap();
        let (_, ar) = ar_fit(&x, 12, &[]).unwrap();
        let dt = detrended_shock(&x, 12, &[]).unwrap();
        let sd = {
            let r: Vec<f64> = ar.values.defined().map(|(_, v)| v).collect();
            (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()
        };
        for ((_, a), (_, b)) in ar.values.defined().zip(dt.values.defined()) {
            assert!((a - b).abs() < 2.0 * sd);
        }
    }

    #[test]
    fn standardize_examples() {
        let s = ShockSeries {
            values: MonthlySeries::from_values(start(), &[-1.0, 1.0]).unwrap(),
            definition: ShockDefinition::ArResid { p: 1 },
            phase_label: None,
            standardized: false,
        };
        let z = standardize(&s).unwrap();
        let v: Vec<f64> = z.values.defined().map(|(_, v)| v).collect();
        let r = 1.0 / 2f64.sqrt();
        assert!((v[0] + r).abs() < 1e-15 && (v[1] - r).abs() < 1e-15);
        assert!(z.standardized);

        let zz = standardize(&z).unwrap();
        for ((_, a), (_, b)) in z.values.defined().zip(zz.values.defined()) {
            assert!((a - b).abs() < 1e-12);
        }

        let flat = ShockSeries {
            values: MonthlySeries::from_values(start(), &[2.0, 2.0, 2.0]).unwrap(),
            ..s
        };
        assert!(matches!(standardize(&flat), Err(Error::DegenerateShock)));
    }

    #[test]
    fn standardized_variance_is_one() {
        let x = MonthlySeries::from_values(start(), &ar1(300, 0.4, 8)).unwrap();
        let (_, s) = ar_fit(&x, 2, &[]).unwrap();
        let z = standardize(&s).unwrap();
        let v: Vec<f64> = z.values.defined().map(|(_, v)| v).collect();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 1e-10);
    }

    #[test]
    fn definition_round_trip() {
        for d in [ShockDefinition::ArResid { p: 12 }, ShockDefinition::Detrended { lags: 6 }] {
            assert_eq!(d.to_string().parse::<ShockDefinition>().unwrap(), d);
        }
        assert!("ar(3)".parse::<ShockDefinition>().is_err());
    }
}
