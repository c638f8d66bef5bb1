//! Run configuration: a TOML file read as flat dotted keys, plus
//! `key=value` overrides. Every default is the baseline specification, so an
//! empty file is a valid configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::compartment::CalibrationOptions;
use crate::econometrics::breakpoint::DEFAULT_MIN_SEGMENT;
use crate::econometrics::lp::LpConfig;
use crate::econometrics::shock::{Segment, ShockDefinition};
use crate::error::{Error, Result};
use crate::io::read_text;
use crate::phase::PhaseThresholds;
use crate::series::MonthIndex;

use super::Specification;

/// A named group of nested breakpoint windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub name: String,
    pub windows: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandauSettings {
    /// Critical point; read from the calibration summary when absent.
    pub phi_c: Option<f64>,
    pub b: f64,
    pub h_field: f64,
    pub tau: f64,
    /// `a` sweep from `a_max` down to `a_min`.
    pub a_max: f64,
    pub a_min: f64,
    pub a_steps: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub theta_c: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_steps: usize,
    pub delta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub injection: f64,
    /// LK trajectories: step, count and noise amplitude.
    pub dt: f64,
    pub steps: usize,
    pub noise_sd: f64,
}

impl Default for LandauSettings {
    fn default() -> Self {
        Self {
            phi_c: None,
            b: 1.0,
            h_field: 0.0,
            tau: 1.0,
            a_max: 1.0,
            a_min: -1.0,
            a_steps: 201,
            epsilon: 0.02,
            lambda: 1.0,
            theta_c: 0.0,
            theta_min: -10.0,
            theta_max: 10.0,
            theta_steps: 201,
            delta: 0.05,
            gamma: 0.1,
            eta: 0.005,
            injection: 1.0,
            dt: 0.01,
            steps: 2000,
            noise_sd: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSettings {
    pub months: usize,
    pub start: MonthIndex,
    pub pi_noise_sd: f64,
    pub phi_noise_sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub monetary: Option<PathBuf>,
    pub cpi: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub thresholds: PhaseThresholds,
    pub tanh_window: Segment,
    pub clusters: Vec<Cluster>,
    pub min_segment: usize,
    pub shock: ShockDefinition,
    pub lp: LpConfig,
    pub robustness: bool,
    /// Horizons averaged when summarizing the sign of a response.
    pub medium_horizons: (usize, usize),
    pub calibration: CalibrationOptions,
    pub efficiency_horizon: Option<usize>,
    pub significant_only: bool,
    pub landau: LandauSettings,
    pub synth: SynthSettings,
}

fn m(y: i32, mo: u32) -> MonthIndex {
    MonthIndex::new(y, mo).expect("valid constant month")
}

/// Nested windows around the three event clusters. The published analysis
/// does not list its windows; these span the documented ranges.
pub fn default_clusters() -> Vec<Cluster> {
    let c = |name: &str, w: [((i32, u32), (i32, u32)); 5]| Cluster {
        name: name.into(),
        windows: w.iter().map(|&((a, b), (c, d))| (m(a, b), m(c, d))).collect(),
    };
    vec![
        c("1990", [((1983, 1), (1997, 12)), ((1984, 1), (1996, 12)), ((1985, 1), (1995, 12)), ((1986, 1), (1994, 12)), ((1987, 1), (1993, 12))]),
        c("2013", [((2008, 1), (2019, 12)), ((2009, 1), (2018, 12)), ((2010, 1), (2017, 12)), ((2010, 7), (2016, 6)), ((2011, 1), (2015, 12))]),
        c("2022", [((2018, 1), (2025, 12)), ((2018, 7), (2025, 6)), ((2019, 1), (2024, 12)), ((2019, 7), (2024, 6)), ((2020, 1), (2024, 6))]),
    ]
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            monetary: None,
            cpi: None,
            out_dir: PathBuf::from("out"),
            seed: 1,
            thresholds: PhaseThresholds::default(),
            tanh_window: (m(2010, 1), m(2018, 12)),
            clusters: default_clusters(),
            min_segment: DEFAULT_MIN_SEGMENT,
            shock: ShockDefinition::ArResid { p: 12 },
            lp: LpConfig::default(),
            robustness: false,
            medium_horizons: (6, 18),
            calibration: CalibrationOptions::default(),
            efficiency_horizon: None,
            significant_only: false,
            landau: LandauSettings::default(),
            synth: SynthSettings {
                months: 1200,
                start: m(1970, 1),
                pi_noise_sd: 0.1,
                phi_noise_sd: 0.0,
            },
        }
    }
}

/// Flattens nested tables into `a.b.c` keys.
fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            v => {
                out.insert(key, v.clone());
            }
        }
    }
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string so `--set data.cpi=path/cpi.csv` works unquoted.
fn parse_override(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

pub fn parse_month(s: &str) -> Result<MonthIndex> {
    let bad = || Error::Config(format!("expected a month `YYYY-MM`, got `{s}`"));
    let (y, mo) = s.trim().split_once('-').ok_or_else(bad)?;
    MonthIndex::new(y.parse().map_err(|_| bad())?, mo.parse().map_err(|_| bad())?).map_err(|_| bad())
}

/// `YYYY-MM:YYYY-MM`, inclusive.
pub fn parse_window(s: &str) -> Result<Segment> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("expected a window `YYYY-MM:YYYY-MM`, got `{s}`")))?;
    let w = (parse_month(a)?, parse_month(b)?);
    if w.1 < w.0 {
        return Err(Error::Config(format!("window `{s}` ends before it starts")));
    }
    Ok(w)
}

struct Keys(BTreeMap<String, toml::Value>);

impl Keys {
    fn take(&mut self, key: &str) -> Option<toml::Value> {
        self.0.remove(key)
    }

    fn float(&mut self, key: &str, slot: &mut f64) -> Result<()> {
        match self.take(key) {
            None => Ok(()),
            Some(toml::Value::Float(v)) => {
                *slot = v;
                Ok(())
            }
            Some(toml::Value::Integer(v)) => {
                *slot = v as f64;
                Ok(())
            }
            Some(v) => Err(Error::Config(format!("`{key}` must be a number, got {v}"))),
        }
    }

    fn uint(&mut self, key: &str, slot: &mut usize) -> Result<()> {
        match self.take(key) {
            None => Ok(()),
            Some(toml::Value::Integer(v)) if v >= 0 => {
                *slot = v as usize;
                Ok(())
            }
            Some(v) => Err(Error::Config(format!("`{key}` must be a non-negative integer, got {v}"))),
        }
    }

    fn boolean(&mut self, key: &str, slot: &mut bool) -> Result<()> {
        match self.take(key) {
            None => Ok(()),
            Some(toml::Value::Boolean(v)) => {
                *slot = v;
                Ok(())
            }
            Some(v) => Err(Error::Config(format!("`{key}` must be true or false, got {v}"))),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(Error::Config(format!("`{key}` must be a string, got {v}"))),
        }
    }
}

impl RunConfig {
    /// Reads `path` (if given), applies `overrides` in order and validates.
    /// Relative data paths resolve against the config file's directory.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut keys = BTreeMap::new();
        if let Some(p) = path {
            let table: toml::Table = read_text(p)?
                .parse()
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            flatten("", &table, &mut keys);
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not `key=value`")))?;
            keys.insert(k.trim().to_string(), parse_override(v.trim()));
        }
        let base = path.and_then(Path::parent).map(Path::to_path_buf);
        Self::from_keys(keys, base.as_deref())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut keys = BTreeMap::new();
        flatten("", &table, &mut keys);
        Self::from_keys(keys, None)
    }

    fn from_keys(map: BTreeMap<String, toml::Value>, base: Option<&Path>) -> Result<Self> {
        let mut k = Keys(map);
        let mut c = RunConfig::default();
        let resolve = |p: String| match base {
            Some(b) if Path::new(&p).is_relative() && !b.as_os_str().is_empty() => b.join(p),
            _ => PathBuf::from(p),
        };
        c.monetary = k.string("data.monetary")?.map(resolve);
        c.cpi = k.string("data.cpi")?.map(resolve);
        if let Some(d) = k.string("output.dir")? {
            c.out_dir = resolve(d);
        }
        let mut seed = c.seed as usize;
        k.uint("seed", &mut seed)?;
        c.seed = seed as u64;
        c.calibration.seed = c.seed;

        let (mut cash, mut reserve) = (c.thresholds.cash_max, c.thresholds.reserve_min);
        k.float("phase.cash_max", &mut cash)?;
        k.float("phase.reserve_min", &mut reserve)?;
        c.thresholds = PhaseThresholds::new(cash, reserve).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(w) = k.string("tanh.window")? {
            c.tanh_window = parse_window(&w)?;
        }

        k.uint("breakpoints.min_segment", &mut c.min_segment)?;
        let cluster_keys: Vec<String> = k.0.keys().filter(|s| s.starts_with("breakpoints.cluster_")).cloned().collect();
        for key in cluster_keys {
            let name = key["breakpoints.cluster_".len()..].to_string();
            let windows = match k.take(&key) {
                Some(toml::Value::Array(a)) => a
                    .iter()
                    .map(|v| match v {
                        toml::Value::String(s) => parse_window(s),
                        v => Err(Error::Config(format!("`{key}` entries must be window strings, got {v}"))),
                    })
                    .collect::<Result<Vec<_>>>()?,
                Some(v) => return Err(Error::Config(format!("`{key}` must be an array of windows, got {v}"))),
                None => unreachable!(),
            };
            match c.clusters.iter_mut().find(|cl| cl.name == name) {
                Some(cl) => cl.windows = windows,
                None => c.clusters.push(Cluster { name, windows }),
            }
        }

        if let Some(s) = k.string("shock.definition")? {
            c.shock = s.parse()?;
        }
        k.uint("lp.horizon", &mut c.lp.horizon)?;
        k.uint("lp.lags", &mut c.lp.lags)?;
        k.uint("lp.hac_lag", &mut c.lp.hac_lag)?;
        k.boolean("lp.robustness", &mut c.robustness)?;
        k.uint("lp.medium_from", &mut c.medium_horizons.0)?;
        k.uint("lp.medium_to", &mut c.medium_horizons.1)?;

        k.uint("calibration.starts", &mut c.calibration.starts)?;
        k.uint("calibration.max_evals", &mut c.calibration.max_evals)?;
        k.uint("calibration.polish_iterations", &mut c.calibration.polish_iterations)?;

        let mut eh = usize::MAX;
        k.uint("efficiency.horizon", &mut eh)?;
        c.efficiency_horizon = (eh != usize::MAX).then_some(eh);
        k.boolean("efficiency.significant_only", &mut c.significant_only)?;

        let l = &mut c.landau;
        let mut phi_c = f64::NAN;
        k.float("landau.phi_c", &mut phi_c)?;
        l.phi_c = (!phi_c.is_nan()).then_some(phi_c);
        for (key, slot) in [
            ("landau.b", &mut l.b),
            ("landau.h", &mut l.h_field),
            ("landau.tau", &mut l.tau),
            ("landau.a_max", &mut l.a_max),
            ("landau.a_min", &mut l.a_min),
            ("landau.epsilon", &mut l.epsilon),
            ("landau.lambda", &mut l.lambda),
            ("landau.theta_c", &mut l.theta_c),
            ("landau.theta_min", &mut l.theta_min),
            ("landau.theta_max", &mut l.theta_max),
            ("landau.delta", &mut l.delta),
            ("landau.gamma", &mut l.gamma),
            ("landau.eta", &mut l.eta),
            ("landau.injection", &mut l.injection),
            ("landau.dt", &mut l.dt),
            ("landau.noise_sd", &mut l.noise_sd),
        ] {
            k.float(key, slot)?;
        }
        k.uint("landau.a_steps", &mut l.a_steps)?;
        k.uint("landau.theta_steps", &mut l.theta_steps)?;
        k.uint("landau.steps", &mut l.steps)?;

        k.uint("synth.months", &mut c.synth.months)?;
        if let Some(s) = k.string("synth.start")? {
            c.synth.start = parse_month(&s)?;
        }
        k.float("synth.pi_noise_sd", &mut c.synth.pi_noise_sd)?;
        k.float("synth.phi_noise_sd", &mut c.synth.phi_noise_sd)?;

        if let Some(unknown) = k.0.keys().next() {
            return Err(Error::Config(format!("unknown configuration key `{unknown}`")));
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.lp.horizon == 0 || self.lp.lags == 0 {
            return bad("lp.horizon and lp.lags must be positive");
        }
        if self.medium_horizons.0 > self.medium_horizons.1 {
            return bad("lp.medium_from must not exceed lp.medium_to");
        }
        if self.calibration.starts == 0 {
            return bad("calibration.starts must be positive");
        }
        if self.landau.a_steps < 2 || self.landau.theta_steps < 2 {
            return bad("landau sweeps need at least two points");
        }
        if !(self.landau.epsilon > 0.0) || !(self.landau.b > 0.0) || !(self.landau.tau > 0.0) {
            return bad("landau.epsilon, landau.b and landau.tau must be positive");
        }
        if let Some(pc) = self.landau.phi_c {
            if !(pc > 0.0 && pc < 1.0) {
                return bad("landau.phi_c must lie in (0, 1)");
            }
        }
        Ok(())
    }

    pub fn specification(&self) -> Specification {
        Specification {
            thresholds: self.thresholds,
            shock: self.shock,
            lp: self.lp,
        }
    }

    pub fn data_paths(&self) -> Result<(&Path, &Path)> {
        match (&self.monetary, &self.cpi) {
            (Some(m), Some(c)) => Ok((m, c)),
            _ => Err(Error::Config("data.monetary and data.cpi must both be set".into())),
        }
    }
}
