//! End-to-end orchestration: derived series, phase-conditional impulse
//! responses, robustness variants and the batch commands built on them.

pub mod commands;
pub mod config;

use crate::econometrics::irf::IrfTable;
use crate::econometrics::lp::{local_projection, LpConfig};
use crate::econometrics::shock::{build_shock, standardize, ShockDefinition};
use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::phase::{classify, phase_means, Phase, PhasePartition, PhaseThresholds};
use crate::series::{index_to_base, merge, order_parameter, yoy, MonthlySeries, Panel};

pub use commands::{run_command, Command, Outcome};
pub use config::RunConfig;

/// Series every analysis step starts from, on the common month range of
/// the monetary and CPI panels.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    pub panel: Panel,
    pub phi: MonthlySeries,
    pub pi: MonthlySeries,
    pub pi_core: MonthlySeries,
    /// Year-over-year growth of the seasonally adjusted base.
    pub g_mb: MonthlySeries,
    pub log_mb_sa: MonthlySeries,
}

impl Derived {
    pub fn new(monetary: &Panel, cpi: &Panel) -> Result<Self> {
        let mut cols: Vec<(String, MonthlySeries)> = monetary.columns().to_vec();
        cols.extend(cpi.columns().iter().cloned());
        let panel = merge(&cols)?;
        let phi = order_parameter(panel.require("RB")?, panel.require("MB")?)?;
        Ok(Self {
            pi: yoy(panel.require("CPI")?)?,
            pi_core: yoy(panel.require("CPI_core")?)?,
            g_mb: yoy(panel.require("MB_SA")?)?,
            log_mb_sa: panel.require("MB_SA")?.ln(),
            phi,
            panel,
        })
    }

    pub fn outcome(&self, response: Response) -> &MonthlySeries {
        match response {
            Response::PiCore => &self.pi_core,
            Response::Phi => &self.phi,
        }
    }

    /// `panel.csv`: raw levels, the constructed variables and levels indexed
    /// to 100 at their first defined month.
    pub fn panel_csv(&self) -> Result<String> {
        let mut cols: Vec<(String, MonthlySeries)> = self.panel.columns().to_vec();
        cols.push(("phi".into(), self.phi.clone()));
        cols.push(("pi".into(), self.pi.clone()));
        cols.push(("pi_core".into(), self.pi_core.clone()));
        cols.push(("g_mb".into(), self.g_mb.clone()));
        for name in ["MB", "RB", "CPI", "CPI_core"] {
            cols.push((format!("{name}_idx"), index_to_base(self.panel.require(name)?)?));
        }
        let mut out = String::from("month");
        for (n, _) in &cols {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for i in 0..self.panel.len() {
            out.push_str(&self.panel.start().offset(i as i64).to_string());
            for (_, s) in &cols {
                out.push(',');
                out.push_str(&crate::io::fmt_opt(s.values()[i]));
            }
            out.push('\n');
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Response {
    PiCore,
    Phi,
}

impl Response {
    pub fn as_str(self) -> &'static str {
        match self {
            Response::PiCore => "pi_core",
            Response::Phi => "phi",
        }
    }
}

/// One specification of the phase-conditional projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Specification {
    pub thresholds: PhaseThresholds,
    pub shock: ShockDefinition,
    pub lp: LpConfig,
}

impl Default for Specification {
    fn default() -> Self {
        Self {
            thresholds: PhaseThresholds::default(),
            shock: ShockDefinition::ArResid { p: 12 },
            lp: LpConfig::default(),
        }
    }
}

/// Cash and reserve projections for both outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseIrfs {
    pub pi_cash: IrfTable,
    pub pi_reserve: IrfTable,
    pub phi_cash: IrfTable,
    pub phi_reserve: IrfTable,
    pub phi_bar_cash: f64,
    pub phi_bar_reserve: f64,
    pub partition: PhasePartition,
}

impl PhaseIrfs {
    pub fn table(&self, phase: Phase, response: Response) -> &IrfTable {
        match (phase, response) {
            (Phase::Reserve, Response::PiCore) => &self.pi_reserve,
            (Phase::Reserve, Response::Phi) => &self.phi_reserve,
            (_, Response::PiCore) => &self.pi_cash,
            (_, Response::Phi) => &self.phi_cash,
        }
    }

    /// Sign of the mean beta over `medium` (clipped to the table's horizon),
    /// ordered (cash pi, reserve pi, cash phi, reserve phi).
    pub fn sign_pattern(&self, medium: (usize, usize)) -> [i8; 4] {
        let s = |t: &IrfTable| {
            let hi = medium.1.min(t.meta.horizon);
            match t.mean_beta(medium.0.min(hi), hi) {
                Some(v) if v > 0.0 => 1,
                Some(v) if v < 0.0 => -1,
                _ => 0,
            }
        };
        [s(&self.pi_cash), s(&self.pi_reserve), s(&self.phi_cash), s(&self.phi_reserve)]
    }
}

/// Within-phase standardized shock and the projections of `response` on it,
/// with the sample restricted to months labeled `phase`.
pub fn phase_irf(d: &Derived, partition: &PhasePartition, phase: Phase, response: Response, spec: &Specification) -> Result<IrfTable> {
    let segments = partition.segments(phase);
    if segments.is_empty() {
        return Err(Error::EmptyPhase(phase));
    }
    let shock = standardize(&build_shock(&d.g_mb, spec.shock, &segments)?)?.with_phase(phase.as_str());
    let mut t = local_projection(d.outcome(response), &shock, &spec.lp, |m| partition.contains(m, phase))?;
    t.meta.response = response.as_str().into();
    let th = partition.thresholds;
    t.meta.extra.push(("thresholds".into(), format!("{}/{}", fmt_num(th.cash_max), fmt_num(th.reserve_min))));
    t.meta.extra.push(("hac_lag".into(), spec.lp.hac_lag.to_string()));
    Ok(t)
}

pub fn estimate_phase_irfs(d: &Derived, spec: &Specification) -> Result<PhaseIrfs> {
    let partition = classify(&d.phi, spec.thresholds)?;
    let (phi_bar_cash, phi_bar_reserve) = phase_means(&d.phi, &partition)?;
    let run = |phase: Phase, response: Response, phi_bar: f64| -> Result<IrfTable> {
        let mut t = phase_irf(d, &partition, phase, response, spec)?;
        t.meta.extra.push(("phi_bar".into(), fmt_num(phi_bar)));
        Ok(t)
    };
    Ok(PhaseIrfs {
        pi_cash: run(Phase::Cash, Response::PiCore, phi_bar_cash)?,
        pi_reserve: run(Phase::Reserve, Response::PiCore, phi_bar_reserve)?,
        phi_cash: run(Phase::Cash, Response::Phi, phi_bar_cash)?,
        phi_reserve: run(Phase::Reserve, Response::Phi, phi_bar_reserve)?,
        phi_bar_cash,
        phi_bar_reserve,
        partition,
    })
}

/// Projections over the intermediate region. The estimates are reported
/// for diagnosis only and carry `unstable_region: true`.
pub fn intermediate_diagnostic(d: &Derived, spec: &Specification) -> Result<Vec<IrfTable>> {
    let partition = classify(&d.phi, spec.thresholds)?;
    [Response::PiCore, Response::Phi]
        .into_iter()
        .map(|r| {
            let mut t = phase_irf(d, &partition, Phase::Intermediate, r, spec)?;
            t.meta.extra.push(("unstable_region".into(), "true".into()));
            Ok(t)
        })
        .collect()
}

/// Named deviation from the baseline specification.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: String,
    pub spec: Specification,
}

/// Baseline first, then every threshold pair, horizon, lag order and shock
/// definition varied one dimension at a time.
pub fn robustness_variants(base: &Specification) -> Vec<Variant> {
    let mut out = vec![Variant { name: "baseline".into(), spec: *base }];
    for th in PhaseThresholds::robustness_presets().into_iter().filter(|t| *t != base.thresholds) {
        out.push(Variant {
            name: format!("thresholds_{}_{}", fmt_num(th.cash_max), fmt_num(th.reserve_min)),
            spec: Specification { thresholds: th, ..*base },
        });
    }
    for h in [12, 24, 36].into_iter().filter(|h| *h != base.lp.horizon) {
        out.push(Variant {
            name: format!("horizon_{h}"),
            spec: Specification { lp: LpConfig { horizon: h, ..base.lp }, ..*base },
        });
    }
    for l in [6, 12, 18].into_iter().filter(|l| *l != base.lp.lags) {
        out.push(Variant {
            name: format!("lags_{l}"),
            spec: Specification { lp: LpConfig { lags: l, ..base.lp }, ..*base },
        });
    }
    let shocks = [
        ShockDefinition::ArResid { p: 6 },
        ShockDefinition::ArResid { p: 12 },
        ShockDefinition::ArResid { p: 18 },
        ShockDefinition::Detrended { lags: 12 },
    ];
    for s in shocks.into_iter().filter(|s| *s != base.shock) {
        out.push(Variant {
            name: format!("shock_{s}"),
            spec: Specification { shock: s, ..*base },
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub variant: Variant,
    pub irfs: PhaseIrfs,
    pub signs: [i8; 4],
}

/// Runs every variant. The sign pattern is stable when all variants agree
/// with the baseline.
pub fn robustness_sweep(d: &Derived, base: &Specification, medium: (usize, usize)) -> Result<Vec<VariantResult>> {
    robustness_variants(base)
        .into_iter()
        .map(|variant| {
            let irfs = estimate_phase_irfs(d, &variant.spec)?;
            let signs = irfs.sign_pattern(medium);
            Ok(VariantResult { variant, irfs, signs })
        })
        .collect()
}
