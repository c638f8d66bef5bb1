//! Synthetic economies with known ground truth.
//!
//! The order parameter follows a tanh profile plus the planted φ kernels,
//! year-over-year base growth follows an AR process whose standardized
//! innovations are the structural shocks, and core inflation embeds the
//! planted π kernels. The kernel applied to a shock is chosen by the phase of
//! the noiseless profile at the shock date. Levels are integrated so that
//! year-over-year transforms invert exactly.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::compartment::{CouplingParams, PhaseModel, Target};
use crate::error::{Error, Result};
use crate::ingest::{write_cpi, write_monetary};
use crate::io::{fmt_num, read_text, write_text};
use crate::phase::{Phase, PhaseThresholds};
use crate::series::{merge, MonthIndex, MonthlySeries, Panel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhProfile {
    pub phi0: f64,
    pub a: f64,
    /// Months since the first generated month.
    pub t0: f64,
    pub w: f64,
}

impl TanhProfile {
    pub fn at(&self, t: f64) -> f64 {
        self.phi0 + self.a * ((t - self.t0) / self.w).tanh()
    }
}

/// `g_t = intercept + sum_i ar[i] g_{t-1-i} + sd * eps_t`, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockProcess {
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// Kernels implied by the two-compartment model in each phase.
    Compartment {
        cash: PhaseModel,
        reserve: PhaseModel,
        coupling: CouplingParams,
    },
    /// Kernels given directly; missing tail entries are zero.
    Explicit {
        phi_cash: Vec<f64>,
        phi_reserve: Vec<f64>,
        pi_cash: Vec<f64>,
        pi_reserve: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub start: MonthIndex,
    pub months: usize,
    pub profile: TanhProfile,
    /// When set, `profile.phi0` and `profile.a` are re-solved so the profile's
    /// cash and reserve means hit these values exactly.
    pub target_means: Option<(f64, f64)>,
    pub thresholds: PhaseThresholds,
    pub shock: ShockProcess,
    pub kernels: KernelSpec,
    /// Kernel support in months.
    pub kernel_len: usize,
    /// Kernel horizons recorded in the ground truth, `0..=truth_horizon`.
    pub truth_horizon: usize,
    pub pi_base: f64,
    pub pi_noise_sd: f64,
    pub headline_noise_sd: f64,
    pub phi_noise_sd: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    /// Japan-like economy: transition centred on 2013-04, phase means 0.127
    /// and 0.694, critical point 0.231.
    fn default() -> Self {
        let start = MonthIndex::new(1970, 1).expect("valid month");
        let t0 = MonthIndex::new(2013, 4).expect("valid month").months_since(start) as f64;
        let params = |a, delta| crate::compartment::CompartmentParams {
            a,
            b: 1.0,
            delta,
            gamma: 0.10,
            eta: 0.05,
        };
        Self {
            start,
            months: 1200,
            profile: TanhProfile { phi0: 0.41, a: 0.29, t0, w: 24.0 },
            target_means: Some((0.127, 0.694)),
            thresholds: PhaseThresholds::default(),
            shock: ShockProcess { intercept: 2.4, ar: vec![0.6], sd: 1.0 },
            kernels: KernelSpec::Compartment {
                cash: PhaseModel { params: params(0.8, 0.05), kappa: 0.01, phi_bar: 0.127 },
                reserve: PhaseModel { params: params(3.0, 0.04), kappa: 0.004, phi_bar: 0.694 },
                coupling: CouplingParams { s_pi: 0.3, phi_c: 0.231 },
            },
            kernel_len: 240,
            truth_horizon: 48,
            pi_base: 1.0,
            pi_noise_sd: 0.1,
            headline_noise_sd: 0.2,
            phi_noise_sd: 0.0,
            seed: 1,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(format!("synthetic spec: {m}")));
        if self.months < 120 {
            return bad(format!("needs at least 120 months, got {}", self.months));
        }
        if !(self.profile.w > 0.0) {
            return bad("profile width must be positive".into());
        }
        if !(self.shock.sd > 0.0) || self.shock.ar.iter().map(|a| a.abs()).sum::<f64>() >= 1.0 {
            return bad("shock process must have positive sd and absolutely summable AR coefficients below one".into());
        }
        if let KernelSpec::Explicit { phi_cash, phi_reserve, pi_cash, pi_reserve } = &self.kernels {
            if [phi_cash, phi_reserve, pi_cash, pi_reserve].iter().any(|k| k.iter().any(|v| !v.is_finite())) {
                return bad("planted kernels must be finite".into());
            }
        }
        if self.kernel_len == 0 {
            return bad("kernel length must be positive".into());
        }
        Ok(())
    }
}

/// Solves the plateaus so that the profile's phase means equal `targets`,
/// with the phase of each month fixed by the current labels and iterated
/// until the labels stop changing.
pub fn solve_profile_means(mut profile: TanhProfile, months: usize, th: PhaseThresholds, targets: (f64, f64)) -> Result<TanhProfile> {
    for _ in 0..100 {
        let labels: Vec<Phase> = (0..months).map(|t| th.label(profile.at(t as f64))).collect();
        let mean_tanh = |phase: Phase| {
            let v: Vec<f64> = (0..months)
                .filter(|&t| labels[t] == phase)
                .map(|t| ((t as f64 - profile.t0) / profile.w).tanh())
                .collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let (Some(tc), Some(tr)) = (mean_tanh(Phase::Cash), mean_tanh(Phase::Reserve)) else {
            return Err(Error::Domain("synthetic profile does not visit both phases".into()));
        };
        // phi0 + a tc = target_c, phi0 + a tr = target_r
        let a = (targets.1 - targets.0) / (tr - tc);
        let phi0 = targets.0 - a * tc;
        let next = TanhProfile { phi0, a, ..profile };
        let stable = (0..months).all(|t| th.label(next.at(t as f64)) == labels[t]);
        profile = next;
        if stable {
            return Ok(profile);
        }
    }
    Err(Error::Domain("profile mean calibration did not settle".into()))
}

fn padded(v: &[f64], len: usize) -> Vec<f64> {
    (0..len).map(|k| v.get(k).copied().unwrap_or(0.0)).collect()
}

/// Kernels indexed `[target][phase]`, phases ordered cash, intermediate,
/// reserve. The intermediate kernel averages the other two.
fn kernels(spec: &SynthSpec) -> [[Vec<f64>; 3]; 2] {
    let len = spec.kernel_len;
    let (phi, pi) = match &spec.kernels {
        KernelSpec::Compartment { cash, reserve, coupling } => {
            let k = |m: &PhaseModel, t: Target| (0..len).map(|h| m.value(t, h as f64, coupling)).collect::<Vec<_>>();
            ([k(cash, Target::Phi), k(reserve, Target::Phi)], [k(cash, Target::PiCore), k(reserve, Target::PiCore)])
        }
        KernelSpec::Explicit { phi_cash, phi_reserve, pi_cash, pi_reserve } => (
            [padded(phi_cash, len), padded(phi_reserve, len)],
            [padded(pi_cash, len), padded(pi_reserve, len)],
        ),
    };
    let mid = |c: &[f64], r: &[f64]| c.iter().zip(r).map(|(a, b)| 0.5 * (a + b)).collect::<Vec<_>>();
    let [pc, pr] = phi;
    let [qc, qr] = pi;
    let pm = mid(&pc, &pr);
    let qm = mid(&qc, &qr);
    [[pc, pm, pr], [qc, qm, qr]]
}

fn phase_slot(p: Phase) -> usize {
    match p {
        Phase::Cash => 0,
        Phase::Intermediate => 1,
        Phase::Reserve => 2,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthEntry {
    pub key: String,
    pub phase: Option<Phase>,
    pub h: Option<usize>,
    pub value: f64,
}

/// Parameters and kernels behind a synthetic economy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub entries: Vec<TruthEntry>,
}

impl GroundTruth {
    pub const CSV_HEADER: &'static str = "key,phase,h,value";

    fn push(&mut self, key: &str, phase: Option<Phase>, h: Option<usize>, value: f64) {
        self.entries.push(TruthEntry { key: key.into(), phase, h, value });
    }

    pub fn get(&self, key: &str, phase: Option<Phase>, h: Option<usize>) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.key == key && e.phase == phase && e.h == h)
            .map(|e| e.value)
    }

    /// Planted kernel `0..=truth_horizon` for `target` in `phase`.
    pub fn kernel(&self, target: Target, phase: Phase) -> Vec<f64> {
        let key = kernel_key(target);
        let mut v: Vec<(usize, f64)> = self
            .entries
            .iter()
            .filter(|e| e.key == key && e.phase == Some(phase))
            .filter_map(|e| e.h.map(|h| (h, e.value)))
            .collect();
        v.sort_by_key(|(h, _)| *h);
        v.into_iter().map(|(_, x)| x).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.key,
                e.phase.map(|p| p.to_string()).unwrap_or_default(),
                e.h.map(|h| h.to_string()).unwrap_or_default(),
                fmt_num(e.value)
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end_matches('\r') == Self::CSV_HEADER => {}
            _ => return Err((1, format!("expected header `{}`", Self::CSV_HEADER))),
        }
        let mut out = GroundTruth::default();
        for (i, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err((i + 1, format!("expected 4 fields, found {}", f.len())));
            }
            let phase = if f[1].is_empty() { None } else { Some(f[1].parse().map_err(|e: Error| (i + 1, e.to_string()))?) };
            let h = if f[2].is_empty() { None } else { Some(f[2].parse().map_err(|_| (i + 1, format!("bad horizon `{}`", f[2])))?) };
            let value = f[3].parse().map_err(|_| (i + 1, format!("bad value `{}`", f[3])))?;
            out.entries.push(TruthEntry { key: f[0].into(), phase, h, value });
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv(&read_text(path)?).map_err(|(line, message)| Error::Parse {
            file: path.to_path_buf(),
            line,
            column: "*".into(),
            message,
        })
    }
}

pub fn kernel_key(target: Target) -> &'static str {
    match target {
        Target::Phi => "kernel_phi",
        Target::PiCore => "kernel_pi_core",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub monetary: Panel,
    pub cpi: Panel,
    pub truth: GroundTruth,
    /// Standardized structural innovations, one per month.
    pub innovations: Vec<f64>,
    pub profile: TanhProfile,
}

impl SynthOutput {
    /// Writes `monetary.csv`, `cpi.csv` and `ground_truth.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_monetary(&dir.join("monetary.csv"), &self.monetary)?;
        write_cpi(&dir.join("cpi.csv"), &self.cpi)?;
        write_text(&dir.join("ground_truth.csv"), &self.truth.to_csv())
    }
}

/// Generates a synthetic economy. Deterministic given `spec.seed`.
pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let n = spec.months;
    let th = spec.thresholds;
    let profile = match spec.target_means {
        Some(t) => solve_profile_means(spec.profile, n, th, t)?,
        None => spec.profile,
    };
    let base_phi: Vec<f64> = (0..n).map(|t| profile.at(t as f64)).collect();
    if base_phi.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::Domain("synthetic spec: tanh profile leaves (0, 1)".into()));
    }
    let true_phase: Vec<Phase> = base_phi.iter().map(|&v| th.label(v)).collect();
    let ks = kernels(spec);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let eps: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let noise = |sd: f64, rng: &mut ChaCha8Rng| if sd > 0.0 { Normal::new(0.0, sd).expect("sd > 0").sample(rng) } else { 0.0 };

    // base growth: AR started at its mean
    let p = spec.shock.ar.len();
    let mean_g = spec.shock.intercept / (1.0 - spec.shock.ar.iter().sum::<f64>());
    let mut g = vec![mean_g; n];
    for t in 0..n {
        let mut v = spec.shock.intercept + spec.shock.sd * eps[t];
        for i in 0..p {
            v += spec.shock.ar[i] * if t > i { g[t - 1 - i] } else { mean_g };
        }
        g[t] = v;
    }

    let response = |target: usize, t: usize| -> f64 {
        (0..=t.min(spec.kernel_len - 1))
            .map(|k| ks[target][phase_slot(true_phase[t - k])][k] * eps[t - k])
            .sum()
    };
    let mut phi = vec![0.0; n];
    let mut pi_core = vec![0.0; n];
    let mut pi_head = vec![0.0; n];
    for t in 0..n {
        phi[t] = base_phi[t] + response(0, t) + noise(spec.phi_noise_sd, &mut rng);
        pi_core[t] = spec.pi_base + response(1, t) + noise(spec.pi_noise_sd, &mut rng);
        pi_head[t] = pi_core[t] + noise(spec.headline_noise_sd, &mut rng);
    }
    if let Some(t) = phi.iter().position(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::Domain(format!(
            "synthetic spec: order parameter leaves (0, 1) at month {}",
            spec.start.offset(t as i64)
        )));
    }

    // levels integrate year-over-year rates from a smooth first year
    let integrate = |rate: &[f64], base: f64, drift: f64| {
        let mut x = vec![0.0; n];
        for t in 0..n {
            x[t] = if t < 12 { base * (1.0 + drift).powi(t as i32) } else { x[t - 12] * (1.0 + rate[t] / 100.0) };
        }
        x
    };
    let mb_sa = integrate(&g, 100_000.0, 0.004);
    let cpi_core = integrate(&pi_core, 100.0, 0.001);
    let cpi = integrate(&pi_head, 100.0, 0.001);
    let mb: Vec<f64> = (0..n)
        .map(|t| {
            let month = spec.start.offset(t as i64).month() as f64;
            mb_sa[t] * (1.0 + 0.01 * (2.0 * std::f64::consts::PI * month / 12.0).sin())
        })
        .collect();
    let rb: Vec<f64> = (0..n).map(|t| phi[t] * mb[t]).collect();
    let bn: Vec<f64> = (0..n).map(|t| 0.95 * (1.0 - phi[t]) * mb[t]).collect();
    let co: Vec<f64> = (0..n).map(|t| 0.05 * (1.0 - phi[t]) * mb[t]).collect();

    let s = |v: &[f64]| MonthlySeries::from_values(spec.start, v);
    let monetary = merge(&[("MB", s(&mb)?), ("BN", s(&bn)?), ("CO", s(&co)?), ("RB", s(&rb)?), ("MB_SA", s(&mb_sa)?)])?;
    let cpi_panel = merge(&[("CPI", s(&cpi)?), ("CPI_core", s(&cpi_core)?)])?;

    let mut truth = GroundTruth::default();
    truth.push("seed", None, None, spec.seed as f64);
    truth.push("months", None, None, n as f64);
    truth.push("profile_phi0", None, None, profile.phi0);
    truth.push("profile_a", None, None, profile.a);
    truth.push("profile_t0", None, None, profile.t0);
    truth.push("profile_t0_decimal_year", None, None, spec.start.decimal_year() + profile.t0 / 12.0);
    truth.push("profile_w", None, None, profile.w);
    truth.push("threshold_cash_max", None, None, th.cash_max);
    truth.push("threshold_reserve_min", None, None, th.reserve_min);
    for phase in [Phase::Cash, Phase::Reserve] {
        let v: Vec<f64> = (0..n).filter(|&t| true_phase[t] == phase).map(|t| base_phi[t]).collect();
        truth.push("profile_phase_mean", Some(phase), None, v.iter().sum::<f64>() / v.len() as f64);
        truth.push("months_in_phase", Some(phase), None, v.len() as f64);
    }
    truth.push("shock_intercept", None, None, spec.shock.intercept);
    for (i, a) in spec.shock.ar.iter().enumerate() {
        truth.push("shock_ar", None, Some(i + 1), *a);
    }
    truth.push("shock_sd", None, None, spec.shock.sd);
    if let KernelSpec::Compartment { cash, reserve, coupling } = &spec.kernels {
        for (phase, m) in [(Phase::Cash, cash), (Phase::Reserve, reserve)] {
            let q = &m.params;
            for (k, v) in [("A", q.a), ("B", q.b), ("delta", q.delta), ("gamma", q.gamma), ("eta", q.eta), ("kappa", m.kappa), ("phi_bar", m.phi_bar)] {
                truth.push(k, Some(phase), None, v);
            }
        }
        truth.push("s_pi", None, None, coupling.s_pi);
        truth.push("phi_c", None, None, coupling.phi_c);
    }
    for (ti, target) in [Target::Phi, Target::PiCore].into_iter().enumerate() {
        for phase in [Phase::Cash, Phase::Intermediate, Phase::Reserve] {
            for h in 0..=spec.truth_horizon {
                let v = ks[ti][phase_slot(phase)].get(h).copied().unwrap_or(0.0);
                truth.push(kernel_key(target), Some(phase), Some(h), v);
            }
        }
    }

    Ok(SynthOutput {
        monetary,
        cpi: cpi_panel,
        truth,
        innovations: eps,
        profile,
    })
}
