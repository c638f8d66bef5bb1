//! Canonical CSV inputs.
//!
//! Monetary file: `date,MB,BN,CO,RB,MB_SA` (amounts in 100 million yen).
//! CPI file: `date,CPI,CPI_core` (index numbers, 2020 = 100).
//! Dates are `YYYY-MM`, ascending, one row per month with no gaps. Empty
//! cells are missing values. Any malformed row aborts the load with a
//! diagnostic naming file, line and column.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{fmt_opt, write_text};
use crate::series::{MonthIndex, MonthlySeries, Panel};

pub const MONETARY_COLUMNS: [&str; 5] = ["MB", "BN", "CO", "RB", "MB_SA"];
pub const CPI_COLUMNS: [&str; 2] = ["CPI", "CPI_core"];
pub const MONETARY_UNIT: &str = "100 million yen";

/// Where the two canonical input files live.
#[derive(Debug, Clone, PartialEq)]
pub struct DataManifest {
    pub monetary_path: PathBuf,
    pub cpi_path: PathBuf,
}

impl DataManifest {
    pub fn load(&self) -> Result<(Panel, Panel)> {
        Ok((load_monetary(&self.monetary_path)?, load_cpi(&self.cpi_path)?))
    }
}

#[derive(Clone, Copy)]
enum Sign {
    NonNegative,
    Positive,
}

pub fn load_monetary(path: &Path) -> Result<Panel> {
    load_canonical(path, &MONETARY_COLUMNS, Sign::NonNegative)
}

pub fn load_cpi(path: &Path) -> Result<Panel> {
    let panel = load_canonical(path, &CPI_COLUMNS, Sign::Positive)?;
    for warning in cpi_base_year_warnings(&panel) {
        log::warn!("{}: {warning}", path.display());
    }
    Ok(panel)
}

/// Flags CPI columns whose 2020 average is outside [95, 105].
///
/// A 2020 = 100 index should average close to 100 over 2020; a large
/// departure usually means the wrong base year or column was exported.
pub fn cpi_base_year_warnings(panel: &Panel) -> Vec<String> {
    let mut out = Vec::new();
    for (name, series) in panel.columns() {
        let vals: Vec<f64> = series
            .defined()
            .filter(|(m, _)| m.year() == 2020)
            .map(|(_, x)| x)
            .collect();
        if vals.is_empty() {
            continue;
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if !(95.0..=105.0).contains(&mean) {
            out.push(format!(
                "{name} averages {mean:.2} over 2020; expected about 100 for a 2020-base index"
            ));
        }
    }
    out
}

fn load_canonical(path: &Path, columns: &[&str], sign: Sign) -> Result<Panel> {
    let file = path.to_path_buf();
    // CRLF is normalized up front so record positions report physical lines.
    let text = crate::io::read_text(path)?.replace("\r\n", "\n");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|source| Error::Csv {
            file: file.clone(),
            source,
        })?
        .clone();
    let expected: Vec<&str> = std::iter::once("date").chain(columns.iter().copied()).collect();
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Validation {
            file,
            line: 1,
            column: "header".into(),
            message: format!("expected `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }

    let mut start: Option<MonthIndex> = None;
    let mut prev: Option<MonthIndex> = None;
    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); columns.len()];

    for record in reader.records() {
        let record = record.map_err(|source| Error::Csv {
            file: file.clone(),
            source,
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != expected.len() {
            return Err(Error::Parse {
                file,
                line,
                column: "*".into(),
                message: format!("expected {} fields, found {}", expected.len(), record.len()),
            });
        }
        let month: MonthIndex = record[0].parse().map_err(|_| Error::Parse {
            file: file.clone(),
            line,
            column: "date".into(),
            message: format!("cannot parse `{}` as YYYY-MM", &record[0]),
        })?;
        if let Some(p) = prev {
            if month == p {
                return Err(Error::Duplicate {
                    file,
                    line,
                    month: month.to_string(),
                });
            }
            if month != p.succ() {
                return Err(Error::Ordering {
                    file,
                    line,
                    message: format!("{month} follows {p}; expected {}", p.succ()),
                });
            }
        } else {
            start = Some(month);
        }
        prev = Some(month);

        for (j, name) in columns.iter().enumerate() {
            let cell = &record[j + 1];
            cols[j].push(parse_cell(cell, sign).map_err(|message| Error::Validation {
                file: file.clone(),
                line,
                column: (*name).into(),
                message,
            })?);
        }
    }

    let start = start.ok_or_else(|| Error::Validation {
        file: file.clone(),
        line: 1,
        column: "*".into(),
        message: "file has no data rows".into(),
    })?;
    let series: Vec<(&str, MonthlySeries)> = columns
        .iter()
        .zip(cols)
        .map(|(name, values)| Ok((*name, MonthlySeries::new(start, values)?)))
        .collect::<Result<_>>()?;
    crate::series::merge(&series)
}

fn parse_cell(cell: &str, sign: Sign) -> std::result::Result<Option<f64>, String> {
    if cell.is_empty() {
        return Ok(None);
    }
    if cell.trim() != cell {
        return Err(format!("surrounding whitespace in `{cell}`"));
    }
    let valid_chars = cell
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    if !valid_chars {
        return Err(format!("`{cell}` is not a plain decimal number"));
    }
    let x: f64 = cell
        .parse()
        .map_err(|_| format!("`{cell}` is not a plain decimal number"))?;
    if !x.is_finite() {
        return Err(format!("`{cell}` is not finite"));
    }
    match sign {
        Sign::NonNegative if x < 0.0 => Err(format!("negative amount {x}")),
        Sign::Positive if x <= 0.0 => Err(format!("index number {x} must be positive")),
        _ => Ok(Some(x)),
    }
}

/// Writes a panel in canonical layout. Columns are emitted in `columns` order.
pub fn write_canonical(path: &Path, panel: &Panel, columns: &[&str]) -> Result<()> {
    let series: Vec<&MonthlySeries> = columns
        .iter()
        .map(|c| panel.require(c))
        .collect::<Result<_>>()?;
    let mut out = String::from("date");
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for i in 0..panel.len() {
        out.push_str(&panel.start().offset(i as i64).to_string());
        for s in &series {
            out.push(',');
            out.push_str(&fmt_opt(s.values()[i]));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_monetary(path: &Path, panel: &Panel) -> Result<()> {
    write_canonical(path, panel, &MONETARY_COLUMNS)
}

pub fn write_cpi(path: &Path, panel: &Panel) -> Result<()> {
    write_canonical(path, panel, &CPI_COLUMNS)
}
