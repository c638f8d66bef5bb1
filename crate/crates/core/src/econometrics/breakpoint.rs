//! Single-break two-segment linear regression by exhaustive grid search.
//!
//! Segment 1 covers the window start through `tau` inclusive, segment 2 the
//! months after `tau`. Each segment gets its own intercept and slope in the
//! coordinate `t` = months since the window start.

use crate::error::{Error, Result};
use crate::series::{MonthIndex, MonthlySeries};

pub const DEFAULT_MIN_SEGMENT: usize = 24;

/// Relative RSS tolerance (scaled by the window's total sum of squares)
/// under which two candidate breaks count as tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakResult {
    /// Last month of the first segment.
    pub tau: MonthIndex,
    pub rss: f64,
    pub seg1: LineFit,
    pub seg2: LineFit,
    pub window: (MonthIndex, MonthIndex),
    /// Another admissible break attains the same RSS within tolerance.
    pub tie: bool,
}

/// Values of `y` over the inclusive window, all required to be defined.
fn window_values(y: &MonthlySeries, window: (MonthIndex, MonthIndex)) -> Result<Vec<f64>> {
    let (from, to) = window;
    if to < from {
        return Err(Error::Domain(format!("window {from}..{to} is reversed")));
    }
    let mut out = Vec::with_capacity((to.months_since(from) + 1) as usize);
    let mut m = from;
    while m <= to {
        match y.get(m) {
            Some(v) => out.push(v),
            None => return Err(Error::Domain(format!("series undefined at {m} inside window {from}..{to}"))),
        }
        m = m.succ();
    }
    Ok(out)
}

/// Cumulative sums for O(1) segment regressions.
struct Prefix {
    s1: Vec<f64>,
    sx: Vec<f64>,
    sxx: Vec<f64>,
    sy: Vec<f64>,
    sxy: Vec<f64>,
    syy: Vec<f64>,
}

impl Prefix {
    fn new(y: &[f64]) -> Self {
        let n = y.len();
        let mean = y.iter().sum::<f64>() / n as f64;
        let mut p = Prefix {
            s1: vec![0.0; n + 1],
            sx: vec![0.0; n + 1],
            sxx: vec![0.0; n + 1],
            sy: vec![0.0; n + 1],
            sxy: vec![0.0; n + 1],
            syy: vec![0.0; n + 1],
        };
        for (i, &v) in y.iter().enumerate() {
            let x = i as f64;
            let yc = v - mean;
            p.s1[i + 1] = p.s1[i] + 1.0;
            p.sx[i + 1] = p.sx[i] + x;
            p.sxx[i + 1] = p.sxx[i] + x * x;
            p.sy[i + 1] = p.sy[i] + yc;
            p.sxy[i + 1] = p.sxy[i] + x * yc;
            p.syy[i + 1] = p.syy[i] + yc * yc;
        }
        p
    }

    /// RSS and fit of the line on rows `lo..hi` (exclusive), intercept in the
    /// centered-`y` scale.
    fn segment(&self, lo: usize, hi: usize) -> (f64, LineFit) {
        let d = |v: &Vec<f64>| v[hi] - v[lo];
        let m = d(&self.s1);
        let (sx, sy) = (d(&self.sx), d(&self.sy));
        let cxx = d(&self.sxx) - sx * sx / m;
        let cxy = d(&self.sxy) - sx * sy / m;
        let cyy = d(&self.syy) - sy * sy / m;
        let slope = cxy / cxx;
        let intercept = (sy - slope * sx) / m;
        ((cyy - slope * cxy).max(0.0), LineFit { intercept, slope })
    }
}

fn admissible(n: usize, min_seg: usize, window: (MonthIndex, MonthIndex)) -> Result<std::ops::RangeInclusive<usize>> {
    if min_seg < 2 || n < 2 * min_seg + 1 {
        return Err(Error::Domain(format!(
            "window {}..{} has {n} months; need at least {} for segments of {min_seg}",
            window.0,
            window.1,
            2 * min_seg + 1
        )));
    }
    // index i is the last row of segment 1
    Ok(min_seg - 1..=n - min_seg - 1)
}

/// Total two-segment RSS for every admissible break, in calendar order.
pub fn rss_profile(
    y: &MonthlySeries,
    window: (MonthIndex, MonthIndex),
    min_seg: usize,
) -> Result<Vec<(MonthIndex, f64)>> {
    let values = window_values(y, window)?;
    let n = values.len();
    let range = admissible(n, min_seg, window)?;
    let prefix = Prefix::new(&values);
    Ok(range
        .map(|i| {
            let (r1, _) = prefix.segment(0, i + 1);
            let (r2, _) = prefix.segment(i + 1, n);
            (window.0.offset(i as i64), r1 + r2)
        })
        .collect())
}

pub fn breakpoint(y: &MonthlySeries, window: (MonthIndex, MonthIndex), min_seg: usize) -> Result<BreakResult> {
    let values = window_values(y, window)?;
    let n = values.len();
    let range = admissible(n, min_seg, window)?;
    let mean = values.iter().sum::<f64>() / n as f64;
    let tss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let prefix = Prefix::new(&values);

    let rss: Vec<(usize, f64)> = range
        .map(|i| (i, prefix.segment(0, i + 1).0 + prefix.segment(i + 1, n).0))
        .collect();
    let best = rss.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * tss.max(f64::MIN_POSITIVE);
    let mut near = rss.iter().filter(|&&(_, r)| r <= best + tol);
    let &(i, r) = near.next().expect("admissible range is non-empty");
    let tie = near.next().is_some();

    let (_, mut seg1) = prefix.segment(0, i + 1);
    let (_, mut seg2) = prefix.segment(i + 1, n);
    seg1.intercept += mean;
    seg2.intercept += mean;
    Ok(BreakResult {
        tau: window.0.offset(i as i64),
        rss: r,
        seg1,
        seg2,
        window,
        tie,
    })
}
