//! Function-specific efficiencies: the peak absolute impulse response of
//! the order parameter (reservation) and of core inflation (consumption).

use crate::econometrics::irf::{IrfMetadata, IrfTable};
use crate::error::{Error, Result};
use crate::io::fmt_num;

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub eff_r: f64,
    pub argmax_r: usize,
    pub eff_c: f64,
    pub argmax_c: usize,
    pub horizon: usize,
    pub phi_meta: IrfMetadata,
    pub pi_meta: IrfMetadata,
    /// Horizons whose 95% band spans zero were discounted.
    pub significant_only: bool,
}

impl EfficiencyReport {
    pub const CSV_HEADER: &'static str = "phase,eff_r,argmax_r,eff_c,argmax_c,H";

    pub fn csv_row(&self, phase: &str) -> String {
        format!(
            "{phase},{},{},{},{},{}",
            fmt_num(self.eff_r),
            self.argmax_r,
            fmt_num(self.eff_c),
            self.argmax_c,
            self.horizon
        )
    }
}

/// Largest `|beta_h|` over `h <= horizon`, earliest horizon on ties.
fn peak(table: &IrfTable, horizon: usize, significant_only: bool, name: &str) -> Result<(f64, usize)> {
    let mut best = (0.0, 0);
    for h in 0..=horizon {
        let row = table
            .row(h)
            .ok_or_else(|| Error::Coverage(format!("{name} IRF has no row for h = {h} (need 0..={horizon})")))?;
        let v = if significant_only && !row.significant() { 0.0 } else { row.beta.abs() };
        if v > best.0 {
            best = (v, h);
        }
    }
    Ok(best)
}

/// Efficiencies from point estimates over `0..=horizon`.
pub fn efficiencies(irf_phi: &IrfTable, irf_pi: &IrfTable, horizon: usize) -> Result<EfficiencyReport> {
    efficiencies_with(irf_phi, irf_pi, horizon, false)
}

/// As [`efficiencies`]; with `significant_only` horizons whose band covers
/// zero contribute nothing. This variant is an extension, off by default.
pub fn efficiencies_with(irf_phi: &IrfTable, irf_pi: &IrfTable, horizon: usize, significant_only: bool) -> Result<EfficiencyReport> {
    let (eff_r, argmax_r) = peak(irf_phi, horizon, significant_only, "phi")?;
    let (eff_c, argmax_c) = peak(irf_pi, horizon, significant_only, "core inflation")?;
    Ok(EfficiencyReport {
        eff_r,
        argmax_r,
        eff_c,
        argmax_c,
        horizon,
        phi_meta: irf_phi.meta.clone(),
        pi_meta: irf_pi.meta.clone(),
        significant_only,
    })
}
