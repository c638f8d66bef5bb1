//! Impulse-response tables and their CSV interchange format.
//!
//! A file holds one or more blocks. Each block is a preamble of
//! `# key: value` lines followed by the header `h,beta,se,ci_low,ci_high,n`
//! and one row per horizon `0..=H`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{fmt_num, read_text, write_text};

/// Normal critical value used for the 95% bands.
pub const CI_Z: f64 = 1.96;

pub const IRF_HEADER: &str = "h,beta,se,ci_low,ci_high,n";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrfRow {
    pub h: usize,
    pub beta: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

impl IrfRow {
    pub fn new(h: usize, beta: f64, se: f64, n: usize) -> Self {
        Self {
            h,
            beta,
            se,
            ci_low: beta - CI_Z * se,
            ci_high: beta + CI_Z * se,
            n,
        }
    }

    /// True when the 95% band excludes zero.
    pub fn significant(&self) -> bool {
        self.ci_low > 0.0 || self.ci_high < 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IrfMetadata {
    pub phase: String,
    pub shock: String,
    pub response: String,
    pub horizon: usize,
    pub lags: usize,
    /// Additional `key: value` pairs, written after the standard keys.
    pub extra: Vec<(String, String)>,
}

impl IrfMetadata {
    pub fn extra_value(&self, key: &str) -> Option<&str> {
        self.extra
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrfTable {
    pub rows: Vec<IrfRow>,
    pub meta: IrfMetadata,
}

impl IrfTable {
    pub fn betas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.beta).collect()
    }

    pub fn row(&self, h: usize) -> Option<&IrfRow> {
        self.rows.iter().find(|r| r.h == h)
    }

    /// Mean beta over `lo..=hi`, restricted to available horizons.
    pub fn mean_beta(&self, lo: usize, hi: usize) -> Option<f64> {
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| (lo..=hi).contains(&r.h))
            .map(|r| r.beta)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Checks the stored band identity and that horizons are `0..=H` in order.
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            if r.h != i {
                return Err(Error::Coverage(format!(
                    "IRF `{}` rows are not 0..H without gaps (row {i} has h = {})",
                    self.meta.response, r.h
                )));
            }
            let tol = 1e-12 * (1.0 + r.beta.abs() + r.se.abs());
            if (r.ci_low - (r.beta - CI_Z * r.se)).abs() > tol
                || (r.ci_high - (r.beta + CI_Z * r.se)).abs() > tol
            {
                return Err(Error::Domain(format!("band identity fails at h = {}", r.h)));
            }
        }
        Ok(())
    }

    pub fn to_csv_block(&self) -> String {
        let m = &self.meta;
        let mut out = format!(
            "# phase: {}\n# shock: {}\n# response: {}\n# H: {}\n# L: {}\n",
            m.phase, m.shock, m.response, m.horizon, m.lags
        );
        for (k, v) in &m.extra {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(IRF_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.h,
                fmt_num(r.beta),
                fmt_num(r.se),
                fmt_num(r.ci_low),
                fmt_num(r.ci_high),
                r.n
            ));
        }
        out
    }
}

pub fn write_irf_file(path: &Path, tables: &[IrfTable]) -> Result<()> {
    let body: String = tables.iter().map(IrfTable::to_csv_block).collect();
    write_text(path, &body)
}

pub fn read_irf_file(path: &Path) -> Result<Vec<IrfTable>> {
    parse_irf_blocks(&read_text(path)?).map_err(|(line, message)| Error::Parse {
        file: path.to_path_buf(),
        line,
        column: "*".into(),
        message,
    })
}

/// Parses block-structured IRF CSV text. Errors carry a 1-based line number.
pub fn parse_irf_blocks(text: &str) -> std::result::Result<Vec<IrfTable>, (usize, String)> {
    let mut tables = Vec::new();
    let mut meta: Option<IrfMetadata> = None;
    let mut rows: Vec<IrfRow> = Vec::new();
    let mut in_rows = false;

    let finish = |meta: &mut Option<IrfMetadata>, rows: &mut Vec<IrfRow>, tables: &mut Vec<IrfTable>| {
        if let Some(m) = meta.take() {
            tables.push(IrfTable {
                rows: std::mem::take(rows),
                meta: m,
            });
        }
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(kv) = line.strip_prefix('#') {
            if in_rows {
                finish(&mut meta, &mut rows, &mut tables);
                in_rows = false;
            }
            let m = meta.get_or_insert_with(IrfMetadata::default);
            let (k, v) = kv
                .split_once(':')
                .ok_or((line_no, format!("metadata line `{line}` lacks `key: value`")))?;
            let (k, v) = (k.trim(), v.trim());
            let parse_usize = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| (line_no, format!("`{k}` must be an integer, got `{v}`")))
            };
            match k {
                "phase" => m.phase = v.to_string(),
                "shock" => m.shock = v.to_string(),
                "response" => m.response = v.to_string(),
                "H" => m.horizon = parse_usize(v)?,
                "L" => m.lags = parse_usize(v)?,
                _ => m.extra.push((k.to_string(), v.to_string())),
            }
            continue;
        }
        if line == IRF_HEADER {
            if meta.is_none() {
                meta = Some(IrfMetadata::default());
            }
            in_rows = true;
            continue;
        }
        if !in_rows {
            return Err((line_no, format!("expected header `{IRF_HEADER}`")));
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err((line_no, format!("expected 6 fields, found {}", f.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| (line_no, format!("cannot parse `{s}` as a number")))
        };
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| (line_no, format!("cannot parse `{s}` as an integer")))
        };
        rows.push(IrfRow {
            h: int(f[0])?,
            beta: num(f[1])?,
            se: num(f[2])?,
            ci_low: num(f[3])?,
            ci_high: num(f[4])?,
            n: int(f[5])?,
        });
    }
    finish(&mut meta, &mut rows, &mut tables);
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(betas: &[f64], phase: &str) -> IrfTable {
        IrfTable {
            rows: betas
                .iter()
                .enumerate()
                .map(|(h, &b)| IrfRow::new(h, b, 0.1 + h as f64 * 0.01, 100 - h))
                .collect(),
            meta: IrfMetadata {
                phase: phase.into(),
                shock: "ar_resid(12)".into(),
                response: "phi".into(),
                horizon: betas.len() - 1,
                lags: 12,
                extra: vec![("unstable_region".into(), "false".into())],
            },
        }
    }

    #[test]
    fn multi_block_round_trip() {
        let a = table(&[0.1, -0.3, 0.2], "cash");
        let b = table(&[1.0 / 3.0, 2.5e-9, -7.0], "reserve");
        let text = format!("{}{}", a.to_csv_block(), b.to_csv_block());
        assert!(text.starts_with("# phase: cash\n"));
        let back = parse_irf_blocks(&text).unwrap();
        assert_eq!(back, vec![a, b]);
        back[0].validate().unwrap();
        assert_eq!(back[0].meta.extra_value("unstable_region"), Some("false"));
    }

    #[test]
    fn rejects_malformed_rows() {
        let t = "# phase: x\nh,beta,se,ci_low,ci_high,n\n0,1,2,3\n";
        assert_eq!(parse_irf_blocks(t).unwrap_err().0, 3);
        let t = "0,1,2,3,4,5\n";
        assert!(parse_irf_blocks(t).is_err());
    }

    #[test]
    fn gap_in_horizons_fails_validation() {
        let mut t = table(&[0.1, 0.2, 0.3], "cash");
        t.rows.remove(1);
        assert!(t.validate().is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(betas in prop::collection::vec(-1e6f64..1e6, 1..40)) {
            let t = table(&betas, "reserve");
            let back = parse_irf_blocks(&t.to_csv_block()).unwrap();
            prop_assert_eq!(&back[0], &t);
            back[0].validate().unwrap();
        }
    }
}
