//! Realized innovations: returns discounted by the ex-ante volatility,
//! `eps(t+1) = r(t+1) / sigma(t)`.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::kernels::KernelWeights;
use crate::series::{PriceSeries, ReturnKind, ReturnSeries};
use crate::volatility::{linear_variance, VarianceForecast};

/// Forecasts below this are treated as exactly zero.
pub const ZERO_VARIANCE: f64 = 1e-300;

/// How the horizon forecast is obtained from the one-day forecast.
pub const HORIZON_RULE: &str = "sqrt-time scaling of the one-day forecast, non-overlapping windows";

#[derive(Debug, Clone, PartialEq)]
pub struct InnovationSeries {
    dates: Vec<NaiveDate>,
    eps: Vec<f64>,
    horizon: usize,
    first_index: usize,
}

impl InnovationSeries {
    /// Dates of the realized returns each innovation is computed from.
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Horizon in business days.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Index in the one-day return series of the return ending the first
    /// innovation; everything before it is warm-up.
    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn n_effective(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }
}

fn discount(date: NaiveDate, ret: f64, variance: f64) -> Result<f64> {
    if variance < ZERO_VARIANCE {
        if ret == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::DegenerateVariance { date, ret });
    }
    Ok(ret / variance.sqrt())
}

/// One-day innovations from a forecast computed on the same return series.
pub fn extract_innovations(returns: &ReturnSeries, forecast: &VarianceForecast) -> Result<InnovationSeries> {
    let start = forecast.warm_up();
    if forecast.dates().first() != returns.dates().get(start) {
        return Err(Error::InvalidParameter(
            "variance forecast is not aligned with the return series".into(),
        ));
    }
    let r = returns.returns();
    let dates = returns.dates();
    let mut out_dates = Vec::new();
    let mut eps = Vec::new();
    for (i, &v) in forecast.variance().iter().enumerate() {
        let t = start + i + 1;
        if t >= r.len() {
            break;
        }
        eps.push(discount(dates[t], r[t], v)?);
        out_dates.push(dates[t]);
    }
    Ok(InnovationSeries { dates: out_dates, eps, horizon: 1, first_index: start + 1 })
}

/// Innovations over non-overlapping `dt`-day windows, each realized
/// return divided by `sqrt(dt) · sigma(t)` forecast at the window start.
///
/// Windows are anchored at the first available forecast, so
/// `n_effective = floor(n / dt)` where `n` is the one-day innovation count.
pub fn horizon_innovations(
    prices: &PriceSeries,
    kernel: &KernelWeights,
    dt: usize,
    kind: ReturnKind,
) -> Result<InnovationSeries> {
    if dt == 0 {
        return Err(Error::InvalidParameter("horizon must be at least one day".into()));
    }
    let returns = prices.returns(kind);
    let forecast = linear_variance(&returns, kernel)?;
    if dt == 1 {
        return extract_innovations(&returns, &forecast);
    }
    // price index = return index + 1
    let p = prices.prices();
    let dates = returns.dates();
    let mut out_dates = Vec::new();
    let mut eps = Vec::new();
    let mut t = forecast.warm_up();
    while t + dt < returns.len() {
        let variance = forecast.at(t).expect("forecast emitted after warm-up");
        let realized = kind.between(p[t + 1], p[t + dt + 1]);
        eps.push(discount(dates[t + dt], realized, dt as f64 * variance)?);
        out_dates.push(dates[t + dt]);
        t += dt;
    }
    Ok(InnovationSeries { dates: out_dates, eps, horizon: dt, first_index: forecast.warm_up() + dt })
}
