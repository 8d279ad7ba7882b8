//! Dated price and return series.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};

use crate::error::{Error, Result};

/// How one-day returns are derived from consecutive prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnKind {
    /// `ln(p(t) / p(t-1))`
    #[default]
    Log,
    /// `p(t) / p(t-1) - 1`
    Simple,
}

impl ReturnKind {
    /// Return over a span from `from` to `to`.
    pub fn between(self, from: f64, to: f64) -> f64 {
        match self {
            ReturnKind::Log => (to / from).ln(),
            ReturnKind::Simple => to / from - 1.0,
        }
    }
}

impl fmt::Display for ReturnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReturnKind::Log => "log",
            ReturnKind::Simple => "simple",
        })
    }
}

impl FromStr for ReturnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log" => Ok(ReturnKind::Log),
            "simple" => Ok(ReturnKind::Simple),
            other => Err(Error::InvalidParameter(format!("unknown return convention `{other}` (log|simple)"))),
        }
    }
}

fn check_increasing(dates: &[NaiveDate]) -> Result<()> {
    match dates.windows(2).find(|w| w[1] <= w[0]) {
        Some(w) => Err(Error::Data(format!("dates must be strictly increasing: {} is followed by {}", w[0], w[1]))),
        None => Ok(()),
    }
}

/// Strictly positive prices on strictly increasing business days.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    name: String,
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
    reordered: bool,
}

impl PriceSeries {
    pub fn new(name: impl Into<String>, dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::Data(format!("{} dates but {} prices", dates.len(), prices.len())));
        }
        if prices.len() < 2 {
            return Err(Error::InsufficientData("a price series needs at least 2 observations".into()));
        }
        check_increasing(&dates)?;
        if let Some((d, p)) = dates.iter().zip(&prices).find(|(_, p)| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::Data(format!("non-positive or non-finite price {p} on {d}")));
        }
        Ok(Self { name: name.into(), dates, prices, reordered: false })
    }

    pub(crate) fn mark_reordered(mut self, reordered: bool) -> Self {
        self.reordered = reordered;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// True when the input was not in date order and had to be sorted.
    pub fn reordered(&self) -> bool {
        self.reordered
    }

    /// Same series with every price multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.name.clone(), self.dates.clone(), self.prices.iter().map(|p| p * factor).collect())
    }

    /// One-day returns; the return dated `t` spans from the previous
    /// observation to `t`, so calendar gaps are absorbed into one return.
    pub fn returns(&self, kind: ReturnKind) -> ReturnSeries {
        let returns = self.prices.windows(2).map(|w| kind.between(w[0], w[1])).collect();
        ReturnSeries { dates: self.dates[1..].to_vec(), returns }
    }
}

/// One-day returns `r(t)` stamped with the date at the end of each span.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, returns: Vec<f64>) -> Result<Self> {
        if dates.len() != returns.len() {
            return Err(Error::Data(format!("{} dates but {} returns", dates.len(), returns.len())));
        }
        check_increasing(&dates)?;
        if let Some((d, r)) = dates.iter().zip(&returns).find(|(_, r)| !r.is_finite()) {
            return Err(Error::Data(format!("non-finite return {r} on {d}")));
        }
        Ok(Self { dates, returns })
    }

    /// Returns stamped with consecutive business days from 2000-01-03.
    pub fn undated(returns: Vec<f64>) -> Result<Self> {
        Self::new(business_days(default_epoch(), returns.len()), returns)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dates.clone(), self.returns.iter().map(|r| r * factor).collect())
    }
}

pub(crate) fn default_epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date")
}

/// `count` consecutive Monday-to-Friday dates starting at `start` (moved
/// forward to a weekday if needed).
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut day = start;
    while out.len() < count {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(day);
        }
        day = day.succ_opt().expect("date in range");
    }
    out
}
