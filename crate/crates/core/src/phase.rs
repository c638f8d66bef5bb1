//! Phase classification from the order parameter, the tanh transition fit
//! and phase means.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::econometrics::shock::Segment;
use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::series::{MonthIndex, MonthlySeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Cash,
    Intermediate,
    Reserve,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Cash => "cash",
            Phase::Intermediate => "intermediate",
            Phase::Reserve => "reserve",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cash" => Ok(Phase::Cash),
            "intermediate" => Ok(Phase::Intermediate),
            "reserve" => Ok(Phase::Reserve),
            other => Err(Error::Config(format!("unknown phase `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseThresholds {
    pub cash_max: f64,
    pub reserve_min: f64,
}

impl Default for PhaseThresholds {
    fn default() -> Self {
        Self {
            cash_max: 0.30,
            reserve_min: 0.60,
        }
    }
}

impl PhaseThresholds {
    pub fn new(cash_max: f64, reserve_min: f64) -> Result<Self> {
        if !(0.0 < cash_max && cash_max < reserve_min && reserve_min < 1.0) {
            return Err(Error::Domain(format!(
                "thresholds must satisfy 0 < cash_max < reserve_min < 1, got {cash_max} and {reserve_min}"
            )));
        }
        Ok(Self { cash_max, reserve_min })
    }

    /// Boundary values fall in the intermediate band.
    pub fn label(&self, phi: f64) -> Phase {
        if phi < self.cash_max {
            Phase::Cash
        } else if phi > self.reserve_min {
            Phase::Reserve
        } else {
            Phase::Intermediate
        }
    }

    /// The threshold variants of the robustness sweep, baseline first.
    pub fn robustness_presets() -> Vec<PhaseThresholds> {
        let mut out = vec![Self::default()];
        for c in [0.25, 0.30, 0.35] {
            for r in [0.55, 0.60, 0.65] {
                let t = Self { cash_max: c, reserve_min: r };
                if t != out[0] {
                    out.push(t);
                }
            }
        }
        out
    }
}

/// Per-month phase labels. Months with missing φ carry no label.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePartition {
    pub start: MonthIndex,
    pub labels: Vec<Option<Phase>>,
    pub thresholds: PhaseThresholds,
}

impl PhasePartition {
    pub fn label(&self, month: MonthIndex) -> Option<Phase> {
        let d = month.months_since(self.start);
        if d < 0 {
            return None;
        }
        self.labels.get(d as usize).copied().flatten()
    }

    pub fn contains(&self, month: MonthIndex, phase: Phase) -> bool {
        self.label(month) == Some(phase)
    }

    pub fn count(&self, phase: Phase) -> usize {
        self.labels.iter().filter(|l| **l == Some(phase)).count()
    }

    /// Maximal runs of consecutive months labeled `phase`, in order.
    pub fn segments(&self, phase: Phase) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut run: Option<usize> = None;
        for (i, l) in self.labels.iter().enumerate() {
            match (*l == Some(phase), run) {
                (true, None) => run = Some(i),
                (false, Some(s)) => {
                    out.push((self.start.offset(s as i64), self.start.offset(i as i64 - 1)));
                    run = None;
                }
                _ => {}
            }
        }
        if let Some(s) = run {
            out.push((self.start.offset(s as i64), self.start.offset(self.labels.len() as i64 - 1)));
        }
        out
    }
}

pub fn classify(phi: &MonthlySeries, th: PhaseThresholds) -> Result<PhasePartition> {
    let labels = phi
        .iter()
        .map(|(m, v)| match v {
            Some(x) if !(0.0..=1.0).contains(&x) => {
                Err(Error::Domain(format!("order parameter {x} at {m} is outside [0, 1]")))
            }
            Some(x) => Ok(Some(th.label(x))),
            None => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhasePartition {
        start: phi.start(),
        labels,
        thresholds: th,
    })
}

/// Mean φ over cash months and over reserve months.
pub fn phase_means(phi: &MonthlySeries, partition: &PhasePartition) -> Result<(f64, f64)> {
    let mean = |phase: Phase| {
        let v: Vec<f64> = phi
            .defined()
            .filter(|(m, _)| partition.contains(*m, phase))
            .map(|(_, x)| x)
            .collect();
        if v.is_empty() {
            Err(Error::EmptyPhase(phase))
        } else {
            Ok(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    Ok((mean(Phase::Cash)?, mean(Phase::Reserve)?))
}

pub const TANH_MAX_ITER: usize = 500;
pub const TANH_WIDTHS: [f64; 3] = [6.0, 12.0, 24.0];
const TANH_T0_GRID: usize = 9;
const MIN_FIT_MONTHS: usize = 24;
/// Admissible `ln w`; keeps the Jacobian finite.
const LN_W_RANGE: std::ops::RangeInclusive<f64> = -7.0..=14.0;

/// Least-squares fit of `phi0 + a * tanh((t - t0) / w)`, `t` in months since
/// the window start.
#[derive(Debug, Clone, PartialEq)]
pub struct TanhFit {
    pub phi0: f64,
    pub a: f64,
    /// Months since `window.0`; fractional.
    pub t0: f64,
    pub w: f64,
    pub sse: f64,
    pub converged: bool,
    pub iterations: usize,
    /// No resolvable transition: amplitude vanishes or the width outgrows the window.
    pub degenerate: bool,
    pub window: (MonthIndex, MonthIndex),
}

impl TanhFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.phi0 + self.a * ((t - self.t0) / self.w).tanh()
    }

    /// Centre of the transition as a fractional calendar year.
    pub fn t0_decimal_year(&self) -> f64 {
        self.window.0.decimal_year() + self.t0 / 12.0
    }

    /// Month containing the centre of the transition.
    pub fn t0_month(&self) -> MonthIndex {
        self.window.0.offset(self.t0.floor() as i64)
    }

    /// Plateaus stay inside [0, 1]; a soft plausibility check.
    pub fn plateaus_in_unit_interval(&self) -> bool {
        let lo = self.phi0 - self.a.abs();
        let hi = self.phi0 + self.a.abs();
        lo >= 0.0 && hi <= 1.0
    }

    pub const CSV_HEADER: &'static str = "phi0,A,t0_calendar,w_months,sse,converged";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_num(self.phi0),
            fmt_num(self.a),
            fmt_num(self.t0_decimal_year()),
            fmt_num(self.w),
            fmt_num(self.sse),
            self.converged
        )
    }
}

struct GnOutcome {
    theta: [f64; 4],
    sse: f64,
    converged: bool,
    iterations: usize,
}

fn tanh_sse(t: &[f64], y: &[f64], th: &[f64; 4]) -> f64 {
    let w = th[3].exp();
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let r = yi - th[0] - th[1] * ((ti - th[2]) / w).tanh();
            r * r
        })
        .sum()
}

/// Gauss–Newton with step halving on `(phi0, a, t0, ln w)`.
fn gauss_newton(t: &[f64], y: &[f64], start: [f64; 4]) -> GnOutcome {
    let n = t.len();
    let mut th = start;
    let mut sse = tanh_sse(t, y, &th);
    for it in 1..=TANH_MAX_ITER {
        let w = th[3].exp();
        let mut jac = DMatrix::zeros(n, 4);
        let mut r = DVector::zeros(n);
        for i in 0..n {
            let z = (t[i] - th[2]) / w;
            let th_z = z.tanh();
            let sech2 = 1.0 - th_z * th_z;
            r[i] = y[i] - th[0] - th[1] * th_z;
            jac[(i, 0)] = 1.0;
            jac[(i, 1)] = th_z;
            jac[(i, 2)] = -th[1] * sech2 / w;
            jac[(i, 3)] = -th[1] * sech2 * z;
        }
        if jac.iter().any(|v| !v.is_finite()) {
            break;
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = match svd.solve(&r, 1e-12 * smax.max(f64::MIN_POSITIVE)) {
            Ok(s) => s,
            Err(_) => break,
        };
        let step_norm = step.norm();
        if !step_norm.is_finite() {
            break;
        }
        if step_norm < 1e-10 {
            return GnOutcome { theta: th, sse, converged: true, iterations: it };
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = [
                th[0] + lambda * step[0],
                th[1] + lambda * step[1],
                th[2] + lambda * step[2],
                th[3] + lambda * step[3],
            ];
            let s = tanh_sse(t, y, &trial);
            if LN_W_RANGE.contains(&trial[3]) && s.is_finite() && s <= sse {
                accepted = Some((trial, s));
                break;
            }
            lambda *= 0.5;
        }
        let Some((trial, s)) = accepted else {
            // no descent along the Gauss–Newton direction: stationary to rounding
            return GnOutcome { theta: th, sse, converged: true, iterations: it };
        };
        let rel = (sse - s) / sse.max(f64::MIN_POSITIVE);
        let moved = lambda * step_norm;
        th = trial;
        sse = s;
        if rel < 1e-12 || moved < 1e-10 || sse == 0.0 {
            return GnOutcome { theta: th, sse, converged: true, iterations: it };
        }
    }
    GnOutcome { theta: th, sse, converged: false, iterations: TANH_MAX_ITER }
}

/// Multi-start tanh fit over the inclusive `window`. Missing months are
/// skipped. Non-convergence is reported through `converged`, never as an error.
pub fn fit_tanh(phi: &MonthlySeries, window: (MonthIndex, MonthIndex)) -> Result<TanhFit> {
    let (from, to) = window;
    if to < from {
        return Err(Error::Domain(format!("window {from}..{to} is reversed")));
    }
    let (t, y): (Vec<f64>, Vec<f64>) = phi
        .defined()
        .filter(|(m, _)| *m >= from && *m <= to)
        .map(|(m, v)| (m.months_since(from) as f64, v))
        .unzip();
    if y.len() < MIN_FIT_MONTHS {
        return Err(Error::SampleSize {
            context: format!("tanh fit over {from}..{to}"),
            needed: MIN_FIT_MONTHS - 1,
            got: y.len(),
        });
    }
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let half = n / 2;
    let early = y[..half].iter().sum::<f64>() / half as f64;
    let late = y[half..].iter().sum::<f64>() / (n - half) as f64;
    let a_start = 0.5 * (hi - lo) * if late >= early { 1.0 } else { -1.0 };
    let span = t[n - 1] - t[0];
    let flat_sse: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();

    let mut best: Option<GnOutcome> = None;
    for g in 0..TANH_T0_GRID {
        let t0 = t[0] + span * (g as f64 + 1.0) / (TANH_T0_GRID as f64 + 1.0);
        for w in TANH_WIDTHS {
            let out = gauss_newton(&t, &y, [mean, a_start, t0, w.ln()]);
            // strict improvement keeps the lowest start index on ties
            if best.as_ref().is_none_or(|b| out.sse < b.sse) {
                best = Some(out);
            }
        }
    }
    let best = best.expect("start grid is non-empty");
    let scale = 1.0 + mean.abs();
    let fit = if best.sse <= flat_sse {
        let w = best.theta[3].exp();
        TanhFit {
            phi0: best.theta[0],
            a: best.theta[1],
            t0: best.theta[2],
            w,
            sse: best.sse,
            converged: best.converged,
            iterations: best.iterations,
            degenerate: best.theta[1].abs() < 1e-8 * scale || w > 100.0 * span.max(1.0),
            window,
        }
    } else {
        TanhFit {
            phi0: mean,
            a: 0.0,
            t0: 0.5 * span,
            w: TANH_WIDTHS[1],
            sse: flat_sse,
            converged: best.converged,
            iterations: best.iterations,
            degenerate: true,
            window,
        }
    };
    Ok(fit)
}
