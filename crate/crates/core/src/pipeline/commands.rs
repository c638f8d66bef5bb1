//! The batch commands. Each is a pure function of the configuration and its
//! input files and writes its outputs under `cfg.out_dir`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::compartment::{calibrate, steady_state_phi, CalibrationTargets, LogisticControl, Rates};
use crate::econometrics::breakpoint::breakpoint;
use crate::econometrics::irf::{read_irf_file, write_irf_file, IrfTable};
use crate::efficiency::{efficiencies_with, EfficiencyReport};
use crate::error::{Error, Result};
use crate::ingest::{cpi_base_year_warnings, DataManifest};
use crate::io::{fmt_num, fmt_opt, read_text, write_text};
use crate::landau::{free_energy, lk_trajectory, pitchfork_sweep, susceptibility, LandauParams};
use crate::phase::{classify, fit_tanh, Phase, TanhFit};
use crate::series::MonthIndex;
use crate::synth::{generate, SynthSpec, TanhProfile};

use super::config::{parse_month, RunConfig};
use super::{estimate_phase_irfs, intermediate_diagnostic, robustness_sweep, Derived};

pub const PANEL_FILE: &str = "panel.csv";
pub const BREAKPOINTS_FILE: &str = "breakpoints.csv";
pub const TANH_FILE: &str = "tanh_fit.csv";
pub const PHASE_DIAGRAM_FILE: &str = "phase_diagram.csv";
pub const PHASE_SUMMARY_FILE: &str = "phase_summary.csv";
pub const IRF_PI_FILE: &str = "IRF_J6_core_inflation.csv";
pub const IRF_PHI_FILE: &str = "IRF_J7_phi.csv";
pub const IRF_INTERMEDIATE_FILE: &str = "IRF_intermediate_diagnostic.csv";
pub const ROBUSTNESS_IRF_FILE: &str = "robustness_irf.csv";
pub const ROBUSTNESS_SIGNS_FILE: &str = "robustness_signs.csv";
pub const CRITICAL_FILE: &str = "critical_point_summary.csv";
pub const CALIBRATION_FLAGS_FILE: &str = "calibration_flags.csv";
pub const EFFICIENCY_FILE: &str = "efficiency.csv";
pub const REPORT_FILE: &str = "report.txt";

/// Era boundaries for the phase-diagram export, inclusive years.
pub const ERAS: [(i32, i32); 4] = [(1971, 1989), (1990, 2012), (2013, 2021), (2022, 2026)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Transform,
    Breakpoints,
    FitPhase,
    Irf,
    Calibrate,
    Landau,
    Efficiency,
    Synth,
    Report,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Transform,
        Command::Breakpoints,
        Command::FitPhase,
        Command::Irf,
        Command::Calibrate,
        Command::Landau,
        Command::Efficiency,
        Command::Synth,
        Command::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Breakpoints => "breakpoints",
            Command::FitPhase => "fit-phase",
            Command::Irf => "irf",
            Command::Calibrate => "calibrate",
            Command::Landau => "landau",
            Command::Efficiency => "efficiency",
            Command::Synth => "synth",
            Command::Report => "report",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// What a command wrote and whether every numerical step converged. When
/// `converged` is false the outputs are partial or flagged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub messages: Vec<String>,
    pub converged: bool,
}

impl Outcome {
    fn new() -> Self {
        Self { converged: true, ..Self::default() }
    }

    fn write(&mut self, path: PathBuf, body: &str) -> Result<()> {
        write_text(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::info!("{msg}");
        self.messages.push(msg);
    }

    fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.messages.push(format!("warning: {msg}"));
    }
}

pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        Command::Transform => cmd_transform(cfg),
        Command::Breakpoints => cmd_breakpoints(cfg),
        Command::FitPhase => cmd_fit_phase(cfg),
        Command::Irf => cmd_irf(cfg),
        Command::Calibrate => cmd_calibrate(cfg),
        Command::Landau => cmd_landau(cfg),
        Command::Efficiency => cmd_efficiency(cfg),
        Command::Synth => cmd_synth(cfg),
        Command::Report => cmd_report(cfg),
    }
}

pub fn load_derived(cfg: &RunConfig, out: &mut Outcome) -> Result<Derived> {
    let (m, c) = cfg.data_paths()?;
    let (monetary, cpi) = DataManifest {
        monetary_path: m.to_path_buf(),
        cpi_path: c.to_path_buf(),
    }
    .load()?;
    for w in cpi_base_year_warnings(&cpi) {
        out.messages.push(format!("warning: {}: {w}", c.display()));
    }
    Derived::new(&monetary, &cpi)
}

pub fn cmd_transform(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let d = load_derived(cfg, &mut out)?;
    out.write(cfg.out_dir.join(PANEL_FILE), &d.panel_csv()?)?;
    out.note(format!("panel spans {} to {}", d.panel.start(), d.panel.end()));
    Ok(out)
}

pub fn cmd_breakpoints(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let d = load_derived(cfg, &mut out)?;
    let mut body = String::from("series,cluster,window_start,window_end,tau,rss,tie,note\n");
    for (name, series) in [("log_MB_SA", &d.log_mb_sa), ("phi", &d.phi), ("pi_core", &d.pi_core)] {
        for cluster in &cfg.clusters {
            for &(a, b) in &cluster.windows {
                match breakpoint(series, (a, b), cfg.min_segment) {
                    Ok(r) => body.push_str(&format!("{name},{},{a},{b},{},{},{},\n", cluster.name, r.tau, fmt_num(r.rss), r.tie)),
                    Err(e) => {
                        out.warn(format!("breakpoint for {name} over {a}..{b} skipped: {e}"));
                        body.push_str(&format!("{name},{},{a},{b},,,,skipped\n", cluster.name));
                    }
                }
            }
        }
    }
    out.write(cfg.out_dir.join(BREAKPOINTS_FILE), &body)?;
    Ok(out)
}

fn era(m: MonthIndex) -> String {
    ERAS.iter()
        .find(|(a, b)| (*a..=*b).contains(&m.year()))
        .map(|(a, b)| format!("{a}-{b}"))
        .unwrap_or_default()
}

pub fn cmd_fit_phase(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let d = load_derived(cfg, &mut out)?;
    let fit = fit_tanh(&d.phi, cfg.tanh_window)?;
    out.write(cfg.out_dir.join(TANH_FILE), &format!("{}\n{}\n", TanhFit::CSV_HEADER, fit.csv_row()))?;
    if !fit.converged {
        out.converged = false;
        out.warn("tanh fit did not converge; best iterate written");
    }
    if fit.degenerate {
        out.warn("tanh fit is degenerate: no resolvable transition in the window");
    }
    out.note(format!("t0 = {} (decimal year {:.3}), w = {:.3} months", fit.t0_month(), fit.t0_decimal_year(), fit.w));

    let part = classify(&d.phi, cfg.thresholds)?;
    let mut diagram = String::from("month,era,phase,phi,pi_core,g_mb,tanh_fit\n");
    for i in 0..d.phi.len() {
        let m = d.phi.month_at(i);
        let t = m.months_since(fit.window.0) as f64;
        let fitted = (fit.window.0..=fit.window.1).contains(&m).then(|| fit.eval(t));
        diagram.push_str(&format!(
            "{m},{},{},{},{},{},{}\n",
            era(m),
            part.label(m).map(|p| p.as_str()).unwrap_or(""),
            fmt_opt(d.phi.values()[i]),
            fmt_opt(d.pi_core.get(m)),
            fmt_opt(d.g_mb.get(m)),
            fmt_opt(fitted)
        ));
    }
    out.write(cfg.out_dir.join(PHASE_DIAGRAM_FILE), &diagram)?;

    let mut summary = String::from("phase,months,phi_mean\n");
    for phase in [Phase::Cash, Phase::Intermediate, Phase::Reserve] {
        let v: Vec<f64> = d.phi.defined().filter(|(m, _)| part.contains(*m, phase)).map(|(_, x)| x).collect();
        let mean = (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        summary.push_str(&format!("{phase},{},{}\n", v.len(), fmt_opt(mean)));
    }
    out.write(cfg.out_dir.join(PHASE_SUMMARY_FILE), &summary)?;
    Ok(out)
}

pub fn cmd_irf(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let d = load_derived(cfg, &mut out)?;
    let spec = cfg.specification();
    let irfs = estimate_phase_irfs(&d, &spec)?;
    write_irf_file(&cfg.out_dir.join(IRF_PI_FILE), &[irfs.pi_cash.clone(), irfs.pi_reserve.clone()])?;
    write_irf_file(&cfg.out_dir.join(IRF_PHI_FILE), &[irfs.phi_cash.clone(), irfs.phi_reserve.clone()])?;
    out.written.push(cfg.out_dir.join(IRF_PI_FILE));
    out.written.push(cfg.out_dir.join(IRF_PHI_FILE));

    match intermediate_diagnostic(&d, &spec) {
        Ok(tables) => {
            write_irf_file(&cfg.out_dir.join(IRF_INTERMEDIATE_FILE), &tables)?;
            out.written.push(cfg.out_dir.join(IRF_INTERMEDIATE_FILE));
        }
        Err(e) => out.warn(format!("intermediate-region diagnostic not estimated: {e}")),
    }

    if cfg.robustness {
        let results = robustness_sweep(&d, &spec, cfg.medium_horizons)?;
        let base = results[0].signs;
        let mut blocks: Vec<IrfTable> = Vec::new();
        let mut signs = String::from("variant,pi_cash,pi_reserve,phi_cash,phi_reserve,matches_baseline\n");
        for r in &results {
            for t in [&r.irfs.pi_cash, &r.irfs.pi_reserve, &r.irfs.phi_cash, &r.irfs.phi_reserve] {
                let mut t = t.clone();
                t.meta.extra.push(("variant".into(), r.variant.name.clone()));
                blocks.push(t);
            }
            let s = r.signs;
            signs.push_str(&format!("{},{},{},{},{},{}\n", r.variant.name, s[0], s[1], s[2], s[3], s == base));
        }
        write_irf_file(&cfg.out_dir.join(ROBUSTNESS_IRF_FILE), &blocks)?;
        out.written.push(cfg.out_dir.join(ROBUSTNESS_IRF_FILE));
        out.write(cfg.out_dir.join(ROBUSTNESS_SIGNS_FILE), &signs)?;
        let unstable: Vec<&str> = results.iter().filter(|r| r.signs != base).map(|r| r.variant.name.as_str()).collect();
        if unstable.is_empty() {
            out.note(format!("medium-horizon sign pattern unchanged across {} variants", results.len()));
        } else {
            out.warn(format!("sign pattern changes under: {}", unstable.join(", ")));
        }
    }
    Ok(out)
}

/// The cash and reserve tables of an IRF file.
fn phase_tables(path: &Path) -> Result<(IrfTable, IrfTable)> {
    let tables = read_irf_file(path)?;
    let pick = |phase: Phase| {
        tables
            .iter()
            .find(|t| t.meta.phase == phase.as_str())
            .cloned()
            .ok_or_else(|| Error::Coverage(format!("{} has no {phase} block", path.display())))
    };
    Ok((pick(Phase::Cash)?, pick(Phase::Reserve)?))
}

fn phi_bar(t: &IrfTable) -> Result<f64> {
    t.meta
        .extra_value("phi_bar")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Coverage(format!("{} IRF block lacks a `phi_bar` entry", t.meta.phase)))
}

pub fn cmd_calibrate(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let (pi_cash, pi_reserve) = phase_tables(&cfg.out_dir.join(IRF_PI_FILE))?;
    let (phi_cash, phi_reserve) = phase_tables(&cfg.out_dir.join(IRF_PHI_FILE))?;
    let targets = CalibrationTargets {
        phi_bar_cash: phi_bar(&phi_cash)?,
        phi_bar_reserve: phi_bar(&phi_reserve)?,
        phi_cash,
        pi_cash,
        phi_reserve,
        pi_reserve,
    };
    let res = calibrate(&targets, &cfg.calibration)?;
    res.write_outputs(&cfg.out_dir)?;
    for f in ["two_compartment_parameters.csv", CRITICAL_FILE, "fit_cash_phase.csv", "fit_reserve_phase.csv"] {
        out.written.push(cfg.out_dir.join(f));
    }
    out.write(
        cfg.out_dir.join(CALIBRATION_FLAGS_FILE),
        &format!(
            "converged,degenerate,ordering_holds,starts,seed\n{},{},{},{},{}\n",
            res.converged,
            res.degenerate,
            res.ordering_holds(),
            res.starts,
            res.seed
        ),
    )?;
    out.note(format!("phi_c = {}", fmt_num(res.coupling.phi_c)));
    out.note(format!(
        "ordering phi_bar_cash < phi_c < phi_bar_reserve ({} < {} < {}): {}",
        fmt_num(res.cash.phi_bar),
        fmt_num(res.coupling.phi_c),
        fmt_num(res.reserve.phi_bar),
        if res.ordering_holds() { "holds" } else { "fails" }
    ));
    if !res.converged || res.degenerate {
        out.converged = false;
        out.warn(format!("calibration flagged: converged = {}, degenerate = {}", res.converged, res.degenerate));
    }
    Ok(out)
}

/// Reads a one-row CSV into (header, value) pairs.
fn read_single_row(path: &Path) -> Result<Vec<(String, String)>> {
    let rows = read_rows(path)?;
    let (header, body) = rows.split_first().ok_or(Error::EmptyInput)?;
    let row = body.first().ok_or_else(|| Error::Coverage(format!("{} has no data row", path.display())))?;
    Ok(header.iter().cloned().zip(row.iter().cloned()).collect())
}

fn read_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = read_text(path)?;
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    r.records()
        .map(|rec| {
            rec.map(|rec| rec.iter().map(str::to_string).collect())
                .map_err(|source| Error::Csv { file: path.to_path_buf(), source })
        })
        .collect()
}

fn lookup<'a>(pairs: &'a [(String, String)], key: &str, path: &Path) -> Result<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Coverage(format!("{} lacks column `{key}`", path.display())))
}

fn evenly(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn cmd_landau(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let l = &cfg.landau;
    let phi_c = match l.phi_c {
        Some(v) => v,
        None => {
            let path = cfg.out_dir.join(CRITICAL_FILE);
            if !path.exists() {
                return Err(Error::Config(format!(
                    "phi_c unavailable: set landau.phi_c or run `calibrate` first ({} missing)",
                    path.display()
                )));
            }
            let pairs = read_single_row(&path)?;
            lookup(&pairs, "phi_c", &path)?
                .parse()
                .map_err(|_| Error::Config(format!("{} holds a malformed phi_c", path.display())))?
        }
    };

    // potential on both sides of the transition
    let mut pot = String::from("a,m,phi,F\n");
    for a in [l.a_max, l.a_min] {
        let p = LandauParams::new(a, l.b, l.h_field, l.tau, phi_c)?;
        for m in evenly(-1.5, 1.5, 301) {
            pot.push_str(&format!("{},{},{},{}\n", fmt_num(a), fmt_num(m), fmt_num(phi_c + m), fmt_num(free_energy(m, &p))));
        }
    }
    out.write(cfg.out_dir.join("landau_potential.csv"), &pot)?;

    let mut sweep = String::from("theta_or_a,m_star,F_min,degenerate_flag\n");
    for r in pitchfork_sweep(&evenly(l.a_max, l.a_min, l.a_steps), l.b, l.h_field)? {
        sweep.push_str(&format!("{},{},{},{}\n", fmt_num(r.a), fmt_num(r.m_star), fmt_num(r.f_min), r.degenerate));
    }
    out.write(cfg.out_dir.join("landau_pitchfork.csv"), &sweep)?;

    let ctrl = LogisticControl { lambda: l.lambda, theta_c: l.theta_c };
    let rates = Rates { delta: l.delta, gamma: l.gamma, eta: l.eta };
    let mut steady = String::from("theta,share,phi_star,m_star\n");
    for theta in evenly(l.theta_min, l.theta_max, l.theta_steps) {
        let phi = steady_state_phi(theta, ctrl, rates, l.injection)?;
        steady.push_str(&format!("{},{},{},{}\n", fmt_num(theta), fmt_num(ctrl.share(theta)), fmt_num(phi), fmt_num(phi - phi_c)));
    }
    out.write(cfg.out_dir.join("steady_state_sweep.csv"), &steady)?;

    let mut sus = String::from("phi,S\n");
    for phi in evenly(0.0, 1.0, 1001) {
        sus.push_str(&format!("{},{}\n", fmt_num(phi), fmt_num(susceptibility(phi, phi_c, l.epsilon)?)));
    }
    out.write(cfg.out_dir.join("susceptibility.csv"), &sus)?;

    let p = LandauParams::new(l.a_min, l.b, l.h_field, l.tau, phi_c)?;
    let mut traj = String::from("m0,step,t,m\n");
    for (i, m0) in [-0.5, 0.1, 0.5].into_iter().enumerate() {
        let path = lk_trajectory(m0, &p, l.noise_sd, l.dt, l.steps, cfg.seed.wrapping_add(i as u64))?;
        for (k, m) in path.iter().enumerate() {
            traj.push_str(&format!("{},{k},{},{}\n", fmt_num(m0), fmt_num(k as f64 * l.dt), fmt_num(*m)));
        }
    }
    out.write(cfg.out_dir.join("lk_trajectories.csv"), &traj)?;
    out.note(format!("landau outputs use phi_c = {}", fmt_num(phi_c)));
    Ok(out)
}

pub fn phase_efficiencies(cfg: &RunConfig) -> Result<[EfficiencyReport; 2]> {
    let (pi_cash, pi_reserve) = phase_tables(&cfg.out_dir.join(IRF_PI_FILE))?;
    let (phi_cash, phi_reserve) = phase_tables(&cfg.out_dir.join(IRF_PHI_FILE))?;
    let h = cfg.efficiency_horizon.unwrap_or(phi_cash.meta.horizon);
    Ok([
        efficiencies_with(&phi_cash, &pi_cash, h, cfg.significant_only)?,
        efficiencies_with(&phi_reserve, &pi_reserve, h, cfg.significant_only)?,
    ])
}

pub fn cmd_efficiency(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let [cash, reserve] = phase_efficiencies(cfg)?;
    let body = format!("{}\n{}\n{}\n", EfficiencyReport::CSV_HEADER, cash.csv_row("cash"), reserve.csv_row("reserve"));
    out.write(cfg.out_dir.join(EFFICIENCY_FILE), &body)?;
    if cfg.significant_only {
        out.note("efficiencies discount horizons whose band covers zero (extension)");
    }
    Ok(out)
}

/// The default synthetic economy, with the transition kept at 2013-04
/// whatever the configured start.
pub fn synth_spec(cfg: &RunConfig) -> SynthSpec {
    let d = SynthSpec::default();
    let t0 = MonthIndex::new(2013, 4).expect("valid month").months_since(cfg.synth.start) as f64;
    SynthSpec {
        start: cfg.synth.start,
        months: cfg.synth.months,
        profile: TanhProfile { t0, ..d.profile },
        pi_noise_sd: cfg.synth.pi_noise_sd,
        phi_noise_sd: cfg.synth.phi_noise_sd,
        thresholds: cfg.thresholds,
        seed: cfg.seed,
        ..d
    }
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let s = generate(&synth_spec(cfg))?;
    s.write(&cfg.out_dir)?;
    for f in ["monetary.csv", "cpi.csv", "ground_truth.csv"] {
        out.written.push(cfg.out_dir.join(f));
    }
    out.note(format!("synthetic economy {} to {}, seed {}", s.monetary.start(), s.monetary.end(), cfg.seed));
    Ok(out)
}

/// Lower median, so the result is always one of the inputs.
fn lower_median(mut v: Vec<MonthIndex>) -> Option<MonthIndex> {
    v.sort();
    (!v.is_empty()).then(|| v[(v.len() - 1) / 2])
}

pub fn cmd_report(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let needed = [TANH_FILE, BREAKPOINTS_FILE, EFFICIENCY_FILE, CRITICAL_FILE, CALIBRATION_FLAGS_FILE];
    let missing: Vec<String> = needed
        .iter()
        .filter(|f| !cfg.out_dir.join(f).exists())
        .map(|f| f.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingOutputs(missing));
    }
    let mut lines: Vec<(String, String)> = Vec::new();

    let path = cfg.out_dir.join(TANH_FILE);
    let tanh = read_single_row(&path)?;
    for key in ["t0_calendar", "w_months", "converged"] {
        lines.push((format!("tanh.{key}"), lookup(&tanh, key, &path)?.to_string()));
    }

    let path = cfg.out_dir.join(BREAKPOINTS_FILE);
    let rows = read_rows(&path)?;
    let mut groups: Vec<((String, String), Vec<MonthIndex>)> = Vec::new();
    for r in rows.iter().skip(1) {
        let key = (r[0].clone(), r[1].clone());
        let tau = r.get(4).and_then(|s| parse_month(s).ok());
        let slot = match groups.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                groups.push((key, Vec::new()));
                groups.len() - 1
            }
        };
        groups[slot].1.extend(tau);
    }
    for ((series, cluster), taus) in groups {
        let median = lower_median(taus).map(|m| m.to_string()).unwrap_or_default();
        lines.push((format!("breakpoints.{series}.{cluster}.median_tau"), median));
    }

    let path = cfg.out_dir.join(EFFICIENCY_FILE);
    let rows = read_rows(&path)?;
    let header = rows.first().ok_or(Error::EmptyInput)?.clone();
    for r in rows.iter().skip(1) {
        for (k, v) in header.iter().zip(r).skip(1) {
            lines.push((format!("efficiency.{}.{k}", r[0]), v.clone()));
        }
    }

    let path = cfg.out_dir.join(CRITICAL_FILE);
    for (k, v) in read_single_row(&path)? {
        lines.push((format!("calibration.{k}"), v));
    }
    let path = cfg.out_dir.join(CALIBRATION_FLAGS_FILE);
    for (k, v) in read_single_row(&path)? {
        lines.push((format!("calibration.{k}"), v));
    }

    let body: String = lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    out.write(cfg.out_dir.join(REPORT_FILE), &body)?;
    Ok(out)
}

/// Parses `key=value` report lines.
pub fn parse_report(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Median month of a series of breaks; exposed for callers summarizing
/// their own windows.
pub fn median_month(taus: &[MonthIndex]) -> Option<MonthIndex> {
    lower_median(taus.to_vec())
}
