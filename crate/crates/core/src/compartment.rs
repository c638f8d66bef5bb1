//! Two-compartment model: a reservation reservoir `R` fed by a circulating
//! compartment `X`,
//!
//! ```text
//! dX/dh = -gamma X,        X(0) = B
//! dR/dh = -delta R + eta X, R(0) = A
//! ```
//!
//! with the linearized order-parameter response, the phase-dependent CPI
//! coupling and calibration against empirical impulse responses.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::econometrics::irf::IrfTable;
use crate::error::{Error, Result};
use crate::io::{fmt_num, write_text};
use crate::optim::{gauss_newton_polish, nelder_mead, Bounds};
use crate::phase::Phase;

/// Relative gap under which `delta` and `gamma` are treated as equal.
pub const RATE_COINCIDENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompartmentParams {
    /// Reservoir impulse share `R(0)`.
    pub a: f64,
    /// Circulation impulse share `X(0)`.
    pub b: f64,
    pub delta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl CompartmentParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.delta, self.gamma, self.eta];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(format!("compartment parameters must be finite and non-negative: {self:?}")));
        }
        if self.a + self.b <= 0.0 {
            return Err(Error::Domain("impulse shares A and B are both zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub s_pi: f64,
    pub phi_c: f64,
}

fn check_h(h: f64) -> Result<()> {
    if h.is_nan() || h < 0.0 {
        return Err(Error::Domain(format!("horizon must be non-negative, got {h}")));
    }
    Ok(())
}

fn x_raw(h: f64, p: &CompartmentParams) -> f64 {
    p.b * (-p.gamma * h).exp()
}

fn r_raw(h: f64, p: &CompartmentParams) -> f64 {
    let d = p.delta - p.gamma;
    let decay = (-p.delta * h).exp();
    let transfer = if d.abs() < RATE_COINCIDENCE_TOL * p.delta.max(p.gamma).max(1.0) {
        h
    } else {
        // (e^{-gamma h} - e^{-delta h}) / (delta - gamma) = e^{-delta h} expm1(d h) / d
        (d * h).exp_m1() / d
    };
    p.a * decay + p.eta * p.b * decay * transfer
}

fn phi_raw(h: f64, p: &CompartmentParams, phi_bar: f64, kappa: f64) -> f64 {
    kappa * ((1.0 - phi_bar) * r_raw(h, p) - phi_bar * x_raw(h, p))
}

fn chi_raw(phi_bar: f64, phi_c: f64) -> f64 {
    1.0 - phi_bar / phi_c
}

fn cpi_raw(h: f64, p: &CompartmentParams, c: &CouplingParams, phi_bar: f64) -> f64 {
    c.s_pi * chi_raw(phi_bar, c.phi_c) * x_raw(h, p)
}

/// `X(h) = B e^{-gamma h}`.
pub fn x_response(h: f64, p: &CompartmentParams) -> Result<f64> {
    check_h(h)?;
    Ok(x_raw(h, p))
}

/// Closed-form reservoir response; the coincident-rate limit is used when
/// `|delta - gamma|` is below [`RATE_COINCIDENCE_TOL`] relative.
pub fn r_response(h: f64, p: &CompartmentParams) -> Result<f64> {
    check_h(h)?;
    Ok(r_raw(h, p))
}

/// `kappa [(1 - phi_bar) R(h) - phi_bar X(h)]`.
pub fn phi_irf(h: f64, p: &CompartmentParams, phi_bar: f64, kappa: f64) -> Result<f64> {
    check_h(h)?;
    if !(phi_bar > 0.0 && phi_bar < 1.0) {
        return Err(Error::Domain(format!("phase mean must lie in (0, 1), got {phi_bar}")));
    }
    Ok(phi_raw(h, p, phi_bar, kappa))
}

/// Effective CPI coupling `1 - phi_bar / phi_c`.
pub fn chi(phi_bar: f64, phi_c: f64) -> Result<f64> {
    if !(phi_c > 0.0) {
        return Err(Error::Domain(format!("critical point must be positive, got {phi_c}")));
    }
    Ok(chi_raw(phi_bar, phi_c))
}

/// `s_pi chi(phi_bar) X(h)`.
pub fn cpi_irf(h: f64, p: &CompartmentParams, c: &CouplingParams, phi_bar: f64) -> Result<f64> {
    check_h(h)?;
    chi(phi_bar, c.phi_c)?;
    Ok(cpi_raw(h, p, c, phi_bar))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticControl {
    pub lambda: f64,
    pub theta_c: f64,
}

impl LogisticControl {
    /// Reservoir share of the inflow, `1 / (1 + e^{-lambda (theta - theta_c)})`.
    pub fn share(&self, theta: f64) -> f64 {
        1.0 / (1.0 + (-self.lambda * (theta - self.theta_c)).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub delta: f64,
    pub gamma: f64,
    pub eta: f64,
}

/// Steady-state order parameter under a constant inflow split `a(theta)` to
/// the reservoir and `1 - a(theta)` to circulation.
pub fn steady_state_phi(theta: f64, ctrl: LogisticControl, rates: Rates, injection: f64) -> Result<f64> {
    if !(injection > 0.0) {
        return Err(Error::Domain(format!("injection must be positive, got {injection}")));
    }
    if !(rates.delta > 0.0 && rates.gamma > 0.0) || rates.eta < 0.0 {
        return Err(Error::Domain(format!("no steady state for rates {rates:?}")));
    }
    let a = ctrl.share(theta);
    let x = (1.0 - a) * injection / rates.gamma;
    let r = (a * injection + rates.eta * x) / rates.delta;
    Ok(r / (r + x))
}

/// Empirical response kind fitted by the calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Phi,
    PiCore,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Phi => "phi",
            Target::PiCore => "pi_core",
        }
    }
}

/// Per-phase model parameters, `B` included so that unnormalized points can
/// be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseModel {
    pub params: CompartmentParams,
    pub kappa: f64,
    pub phi_bar: f64,
}

impl PhaseModel {
    pub fn value(&self, target: Target, h: f64, coupling: &CouplingParams) -> f64 {
        match target {
            Target::Phi => phi_raw(h, &self.params, self.phi_bar, self.kappa),
            Target::PiCore => cpi_raw(h, &self.params, coupling, self.phi_bar),
        }
    }
}

/// The four empirical kernels the calibration matches.
#[derive(Debug, Clone)]
pub struct CalibrationTargets {
    pub phi_cash: IrfTable,
    pub pi_cash: IrfTable,
    pub phi_reserve: IrfTable,
    pub pi_reserve: IrfTable,
    pub phi_bar_cash: f64,
    pub phi_bar_reserve: f64,
}

impl CalibrationTargets {
    /// Horizons, phi_bars and standard errors are checked here.
    pub fn validate(&self) -> Result<()> {
        let grid: Vec<usize> = self.phi_cash.rows.iter().map(|r| r.h).collect();
        if grid.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (name, t) in self.tables() {
            if t.rows.iter().map(|r| r.h).ne(grid.iter().copied()) {
                return Err(Error::Coverage(format!("{name} does not share the horizon grid of the cash phi table")));
            }
            if let Some(r) = t.rows.iter().find(|r| !(r.se > 0.0) || !r.se.is_finite() || !r.beta.is_finite()) {
                return Err(Error::Weight { table: name.into(), h: r.h });
            }
        }
        for pb in [self.phi_bar_cash, self.phi_bar_reserve] {
            if !(pb > 0.0 && pb < 1.0) {
                return Err(Error::Domain(format!("phase mean must lie in (0, 1), got {pb}")));
            }
        }
        if self.phi_bar_cash >= self.phi_bar_reserve {
            return Err(Error::Domain("cash phase mean must be below the reserve phase mean".into()));
        }
        Ok(())
    }

    fn tables(&self) -> [(&'static str, &IrfTable); 4] {
        [
            ("phi_cash", &self.phi_cash),
            ("pi_cash", &self.pi_cash),
            ("phi_reserve", &self.phi_reserve),
            ("pi_reserve", &self.pi_reserve),
        ]
    }

    fn blocks(&self) -> [(Phase, Target, &IrfTable); 4] {
        [
            (Phase::Cash, Target::Phi, &self.phi_cash),
            (Phase::Cash, Target::PiCore, &self.pi_cash),
            (Phase::Reserve, Target::Phi, &self.phi_reserve),
            (Phase::Reserve, Target::PiCore, &self.pi_reserve),
        ]
    }
}

/// Weighted residuals `(model - beta) / se`, ordered by phase, target and h.
pub fn weighted_residuals(targets: &CalibrationTargets, cash: &PhaseModel, reserve: &PhaseModel, coupling: &CouplingParams) -> Vec<f64> {
    let mut out = Vec::new();
    for (phase, target, table) in targets.blocks() {
        let m = if phase == Phase::Cash { cash } else { reserve };
        out.extend(table.rows.iter().map(|r| (m.value(target, r.h as f64, coupling) - r.beta) / r.se));
    }
    out
}

/// Sum of squared weighted residuals.
pub fn calibration_objective(targets: &CalibrationTargets, cash: &PhaseModel, reserve: &PhaseModel, coupling: &CouplingParams) -> f64 {
    weighted_residuals(targets, cash, reserve, coupling).iter().map(|v| v * v).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetResidual {
    pub phase: Phase,
    pub target: Target,
    pub h: usize,
    pub empirical: f64,
    pub model: f64,
    /// `empirical - model`, unweighted.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub cash: PhaseModel,
    pub reserve: PhaseModel,
    pub coupling: CouplingParams,
    pub objective: f64,
    pub residuals: Vec<TargetResidual>,
    pub converged: bool,
    /// The fitted responses vanish; parameters are not identified.
    pub degenerate: bool,
    pub starts: usize,
    pub seed: u64,
}

impl CalibrationResult {
    /// `phi_bar_cash < phi_c < phi_bar_reserve`.
    pub fn ordering_holds(&self) -> bool {
        self.cash.phi_bar < self.coupling.phi_c && self.coupling.phi_c < self.reserve.phi_bar
    }

    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        let mut params = String::from("phase,A,B,delta,gamma,eta,kappa\n");
        for (phase, m) in [(Phase::Cash, &self.cash), (Phase::Reserve, &self.reserve)] {
            let p = &m.params;
            params.push_str(&format!(
                "{phase},{},{},{},{},{},{}\n",
                fmt_num(p.a),
                fmt_num(p.b),
                fmt_num(p.delta),
                fmt_num(p.gamma),
                fmt_num(p.eta),
                fmt_num(m.kappa)
            ));
        }
        write_text(&dir.join("two_compartment_parameters.csv"), &params)?;
        write_text(
            &dir.join("critical_point_summary.csv"),
            &format!(
                "phi_c,s_pi,phi_bar_cash,phi_bar_reserve,objective\n{},{},{},{},{}\n",
                fmt_num(self.coupling.phi_c),
                fmt_num(self.coupling.s_pi),
                fmt_num(self.cash.phi_bar),
                fmt_num(self.reserve.phi_bar),
                fmt_num(self.objective)
            ),
        )?;
        for (phase, file) in [(Phase::Cash, "fit_cash_phase.csv"), (Phase::Reserve, "fit_reserve_phase.csv")] {
            let mut body = String::from("h,target,empirical_beta,model_value,residual\n");
            for r in self.residuals.iter().filter(|r| r.phase == phase) {
                body.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.h,
                    r.target.as_str(),
                    fmt_num(r.empirical),
                    fmt_num(r.model),
                    fmt_num(r.residual)
                ));
            }
            write_text(&dir.join(file), &body)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalibrationOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_evals: usize,
    pub polish_iterations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            starts: 50,
            seed: 1,
            max_evals: 4000,
            polish_iterations: 200,
        }
    }
}

const N_PARAMS: usize = 12;

/// Layout: per phase `(A, delta, gamma, eta, kappa)` for cash then reserve,
/// then `s_pi`, `phi_c`. `B` is pinned to 1 in both phases.
fn unpack(x: &[f64], targets: &CalibrationTargets) -> (PhaseModel, PhaseModel, CouplingParams) {
    let phase = |o: usize, phi_bar: f64| PhaseModel {
        params: CompartmentParams {
            a: x[o],
            b: 1.0,
            delta: x[o + 1],
            gamma: x[o + 2],
            eta: x[o + 3],
        },
        kappa: x[o + 4],
        phi_bar,
    };
    (
        phase(0, targets.phi_bar_cash),
        phase(5, targets.phi_bar_reserve),
        CouplingParams { s_pi: x[10], phi_c: x[11] },
    )
}

fn max_abs(t: &IrfTable) -> f64 {
    t.rows.iter().map(|r| r.beta.abs()).fold(0.0, f64::max)
}

/// se-weighted least-squares calibration of both phases and the shared
/// coupling. Deterministic given `opts.seed`.
pub fn calibrate(targets: &CalibrationTargets, opts: &CalibrationOptions) -> Result<CalibrationResult> {
    targets.validate()?;
    let mut lo = vec![0.0; N_PARAMS];
    let mut hi = vec![f64::INFINITY; N_PARAMS];
    lo[10] = f64::NEG_INFINITY;
    lo[11] = 0.01;
    hi[11] = 0.99;
    let bounds = Bounds { lo, hi };

    let objective = |x: &[f64]| {
        let (c, r, k) = unpack(x, targets);
        calibration_objective(targets, &c, &r, &k)
    };
    let residuals = |x: &[f64]| {
        let (c, r, k) = unpack(x, targets);
        weighted_residuals(targets, &c, &r, &k)
    };

    let phi_scale = [max_abs(&targets.phi_cash), max_abs(&targets.phi_reserve)];
    let pi_scale = max_abs(&targets.pi_cash).max(max_abs(&targets.pi_reserve));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for _ in 0..opts.starts.max(1) {
        let mut x0 = vec![0.0; N_PARAMS];
        let mut step = vec![0.0; N_PARAMS];
        for (ph, o) in [0usize, 5].into_iter().enumerate() {
            x0[o] = rng.random_range(0.1..4.0);
            x0[o + 1] = rng.random_range(0.01..0.5);
            x0[o + 2] = rng.random_range(0.01..0.5);
            x0[o + 3] = rng.random_range(0.0..0.3);
            x0[o + 4] = rng.random_range(0.1..2.0) * phi_scale[ph].max(1e-12);
            step[o] = 0.5;
            step[o + 1] = 0.05;
            step[o + 2] = 0.05;
            step[o + 3] = 0.03;
            step[o + 4] = 0.3 * phi_scale[ph].max(1e-12);
        }
        x0[10] = rng.random_range(0.1..2.0) * pi_scale.max(1e-12);
        x0[11] = rng.random_range(0.05..0.95);
        step[10] = 0.3 * pi_scale.max(1e-12);
        step[11] = 0.05;

        let nm = nelder_mead(objective, &x0, &step, &bounds, opts.max_evals, 1e-14, 1e-9);
        let gn = gauss_newton_polish(residuals, &nm.x, &bounds, opts.polish_iterations);
        let (x, f, conv) = if gn.f <= nm.f { (gn.x, gn.f, nm.converged || gn.converged) } else { (nm.x, nm.f, nm.converged) };
        if best.as_ref().is_none_or(|b| f < b.1) {
            best = Some((x, f, conv));
        }
    }
    let (x, f, converged) = best.expect("at least one start");
    let (cash, reserve, coupling) = unpack(&x, targets);

    let mut rows = Vec::new();
    let mut model_max: f64 = 0.0;
    let mut target_max: f64 = 0.0;
    for (phase, target, table) in targets.blocks() {
        let m = if phase == Phase::Cash { &cash } else { &reserve };
        for r in &table.rows {
            let v = m.value(target, r.h as f64, &coupling);
            model_max = model_max.max(v.abs());
            target_max = target_max.max(r.beta.abs());
            rows.push(TargetResidual {
                phase,
                target,
                h: r.h,
                empirical: r.beta,
                model: v,
                residual: r.beta - v,
            });
        }
    }
    Ok(CalibrationResult {
        cash,
        reserve,
        coupling,
        objective: f,
        residuals: rows,
        converged,
        degenerate: target_max == 0.0 || model_max <= 1e-6 * target_max,
        starts: opts.starts.max(1),
        seed: opts.seed,
    })
}
