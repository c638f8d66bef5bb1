//! Month-indexed series and the variable constructions built on them.
//!
//! Missing values are explicit (`None`) and propagate through every transform;
//! nothing is imputed. Month-end alignment is represented by `(year, month)`
//! alone.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A calendar month. Ordered by `(year, month)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthIndex {
    year: i32,
    month: u8,
}

impl MonthIndex {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Domain(format!("month {month} outside 1..12")));
        }
        Ok(Self {
            year,
            month: month as u8,
        })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month as u32
    }

    /// Months since year 0, January. Exact integer coordinate.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        let year = ordinal.div_euclid(12);
        let month = ordinal.rem_euclid(12) + 1;
        Self {
            year: year as i32,
            month: month as u8,
        }
    }

    pub fn offset(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn succ(self) -> Self {
        self.offset(1)
    }

    pub fn pred(self) -> Self {
        self.offset(-1)
    }

    /// `self - other` in months.
    pub fn months_since(self, other: MonthIndex) -> i64 {
        self.ordinal() - other.ordinal()
    }

    /// Fractional calendar year of the month start, e.g. 2013-04 -> 2013.25.
    pub fn decimal_year(self) -> f64 {
        self.year as f64 + (self.month as f64 - 1.0) / 12.0
    }
}

impl fmt::Display for MonthIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthIndex {
    type Err = Error;

    /// Accepts `YYYY-MM`; a trailing `-DD` day is accepted and dropped.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("cannot parse `{s}` as YYYY-MM"));
        let mut parts = s.trim().split('-');
        let year = parts.next().ok_or_else(bad)?;
        let month = parts.next().ok_or_else(bad)?;
        if let Some(day) = parts.next() {
            if day.len() != 2 || day.parse::<u32>().is_err() {
                return Err(bad());
            }
        }
        if parts.next().is_some() || year.len() != 4 || month.len() != 2 {
            return Err(bad());
        }
        let year: i32 = year.parse().map_err(|_| bad())?;
        let month: u32 = month.parse().map_err(|_| bad())?;
        MonthIndex::new(year, month).map_err(|_| bad())
    }
}

/// A contiguous monthly series with explicit missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries {
    start: MonthIndex,
    values: Vec<Option<f64>>,
}

impl MonthlySeries {
    pub fn new(start: MonthIndex, values: Vec<Option<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Length { needed: 1, got: 0 });
        }
        for (i, v) in values.iter().enumerate() {
            if let Some(x) = v {
                if !x.is_finite() {
                    return Err(Error::Domain(format!(
                        "non-finite value {x} at {}",
                        start.offset(i as i64)
                    )));
                }
            }
        }
        Ok(Self { start, values })
    }

    /// Fully defined series from plain values.
    pub fn from_values(start: MonthIndex, values: &[f64]) -> Result<Self> {
        Self::new(start, values.iter().map(|&v| Some(v)).collect())
    }

    pub fn start(&self) -> MonthIndex {
        self.start
    }

    /// Last month covered (inclusive).
    pub fn end(&self) -> MonthIndex {
        self.start.offset(self.values.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn month_at(&self, i: usize) -> MonthIndex {
        self.start.offset(i as i64)
    }

    /// Position of `month`, if covered.
    pub fn position(&self, month: MonthIndex) -> Option<usize> {
        let d = month.months_since(self.start);
        (d >= 0 && (d as usize) < self.values.len()).then_some(d as usize)
    }

    pub fn get(&self, month: MonthIndex) -> Option<f64> {
        self.position(month).and_then(|i| self.values[i])
    }

    /// Value at an integer offset from the start; out-of-range reads as missing.
    pub fn at(&self, i: i64) -> Option<f64> {
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MonthIndex, Option<f64>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.month_at(i), *v))
    }

    pub fn defined(&self) -> impl Iterator<Item = (MonthIndex, f64)> + '_ {
        self.iter().filter_map(|(m, v)| v.map(|x| (m, x)))
    }

    pub fn defined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Applies `f` to every defined value. Results must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.start, self.values.iter().map(|v| v.map(&f)).collect())
    }

    /// Natural log; non-positive values become missing.
    pub fn ln(&self) -> Self {
        let values = self
            .values
            .iter()
            .map(|v| v.filter(|&x| x > 0.0).map(f64::ln))
            .collect();
        Self {
            start: self.start,
            values,
        }
    }

    /// Restricts to `[from, to]` (inclusive). Months outside the series read as missing.
    pub fn window(&self, from: MonthIndex, to: MonthIndex) -> Result<Self> {
        if to < from {
            return Err(Error::Domain(format!("empty window {from}..{to}")));
        }
        let n = to.months_since(from) + 1;
        let base = from.months_since(self.start);
        let values = (0..n).map(|i| self.at(base + i)).collect();
        Self::new(from, values)
    }
}

/// Year-over-year growth in percent: `100 * (x_t / x_{t-12} - 1)`.
pub fn yoy(series: &MonthlySeries) -> Result<MonthlySeries> {
    if series.len() < 13 {
        return Err(Error::Length {
            needed: 13,
            got: series.len(),
        });
    }
    let values = (0..series.len() as i64)
        .map(|i| match (series.at(i), series.at(i - 12)) {
            (Some(x), Some(base)) if base != 0.0 => Some(100.0 * (x / base - 1.0)),
            _ => None,
        })
        .collect();
    MonthlySeries::new(series.start(), values)
}

/// Reserve share of the monetary base, `rb / mb`, on the common month range.
pub fn order_parameter(rb: &MonthlySeries, mb: &MonthlySeries) -> Result<MonthlySeries> {
    if rb.start() != mb.start() || rb.len() != mb.len() {
        return Err(Error::Alignment(format!(
            "RB covers {}..{} but MB covers {}..{}",
            rb.start(),
            rb.end(),
            mb.start(),
            mb.end()
        )));
    }
    let mut out = Vec::with_capacity(rb.len());
    for (i, (r, m)) in rb.values().iter().zip(mb.values()).enumerate() {
        let month = rb.month_at(i);
        match (r, m) {
            (Some(r), Some(m)) => {
                if *m <= 0.0 {
                    return Err(Error::Domain(format!(
                        "monetary base {m} is not positive at {month}"
                    )));
                }
                if r > m {
                    return Err(Error::Domain(format!(
                        "reserve balances {r} exceed monetary base {m} at {month}"
                    )));
                }
                out.push(Some(r / m));
            }
            (Some(_), None) => {
                return Err(Error::Domain(format!("monetary base missing at {month}")));
            }
            _ => out.push(None),
        }
    }
    MonthlySeries::new(rb.start(), out)
}

/// Rebases to 100 at the first defined month.
pub fn index_to_base(series: &MonthlySeries) -> Result<MonthlySeries> {
    let (month, base) = series.defined().next().ok_or(Error::EmptyInput)?;
    if base == 0.0 {
        return Err(Error::Domain(format!("base value at {month} is zero")));
    }
    let values = series
        .values()
        .iter()
        .map(|v| v.map(|x| 100.0 * x / base))
        .collect();
    MonthlySeries::new(series.start(), values)
}

/// Several aligned series sharing one month range.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    start: MonthIndex,
    len: usize,
    columns: Vec<(String, MonthlySeries)>,
}

impl Panel {
    pub fn start(&self) -> MonthIndex {
        self.start
    }

    pub fn end(&self) -> MonthIndex {
        self.start.offset(self.len as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn columns(&self) -> &[(String, MonthlySeries)] {
        &self.columns
    }

    pub fn get(&self, name: &str) -> Option<&MonthlySeries> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Like [`Panel::get`] but reports the missing column.
    pub fn require(&self, name: &str) -> Result<&MonthlySeries> {
        self.get(name)
            .ok_or_else(|| Error::Alignment(format!("panel has no column `{name}`")))
    }

    /// Adds a column that already matches the panel range.
    pub fn insert(&mut self, name: impl Into<String>, series: MonthlySeries) -> Result<()> {
        let name = name.into();
        if series.start() != self.start || series.len() != self.len {
            return Err(Error::Alignment(format!(
                "column `{name}` covers {}..{}, panel covers {}..{}",
                series.start(),
                series.end(),
                self.start,
                self.end()
            )));
        }
        if self.get(&name).is_some() {
            return Err(Error::Alignment(format!("duplicate column `{name}`")));
        }
        self.columns.push((name, series));
        Ok(())
    }
}

/// Merges named series on the intersection of their month ranges.
pub fn merge<S: AsRef<str>>(series: &[(S, MonthlySeries)]) -> Result<Panel> {
    if series.is_empty() {
        return Err(Error::EmptyInput);
    }
    let start = series.iter().map(|(_, s)| s.start()).max().unwrap();
    let end = series.iter().map(|(_, s)| s.end()).min().unwrap();
    if end < start {
        return Err(Error::Alignment(format!(
            "series do not overlap (latest start {start}, earliest end {end})"
        )));
    }
    let mut panel = Panel {
        start,
        len: end.months_since(start) as usize + 1,
        columns: Vec::with_capacity(series.len()),
    };
    for (name, s) in series {
        panel.insert(name.as_ref(), s.window(start, end)?)?;
    }
    Ok(panel)
}
