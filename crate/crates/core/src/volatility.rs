//! One-step-ahead variance forecasts.
//!
//! The linear forecast made at `t` is `Σ_l w(l) r(t-l)^2` and predicts the
//! return at `t + 1`. The location term is fixed to zero throughout.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::kernels::KernelWeights;
use crate::series::ReturnSeries;

/// Variance forecasts `variance()[i]` made at return index `warm_up() + i`.
/// No forecast is emitted before the kernel support is filled.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceForecast {
    dates: Vec<NaiveDate>,
    variance: Vec<f64>,
    warm_up: usize,
}

impl VarianceForecast {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    /// Index in the originating return series of the first forecast.
    pub fn warm_up(&self) -> usize {
        self.warm_up
    }

    pub fn len(&self) -> usize {
        self.variance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variance.is_empty()
    }

    /// Forecast made at return index `t`, if one was emitted.
    pub fn at(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.warm_up).and_then(|i| self.variance.get(i).copied())
    }
}

/// Streaming evaluation of a quadratic variance estimator over a ring
/// buffer of the last `l_max + 1` squared returns.
#[derive(Debug, Clone)]
pub struct VarianceFilter {
    weights: Vec<f64>,
    squares: Vec<f64>,
    next: usize,
    seen: usize,
}

impl VarianceFilter {
    pub fn new(kernel: &KernelWeights) -> Self {
        Self::with_mass(kernel, 1.0)
    }

    /// Filter whose weights sum to `mass` instead of one. Only meaningful
    /// for studying inconsistent processes.
    pub fn with_mass(kernel: &KernelWeights, mass: f64) -> Self {
        Self {
            weights: kernel.weights().iter().map(|w| w * mass).collect(),
            squares: vec![0.0; kernel.len()],
            next: 0,
            seen: 0,
        }
    }

    pub fn push(&mut self, r: f64) {
        self.squares[self.next] = r * r;
        self.next = (self.next + 1) % self.squares.len();
        self.seen += 1;
    }

    pub fn is_ready(&self) -> bool {
        self.seen >= self.squares.len()
    }

    /// Current forecast, once `l_max + 1` returns have been pushed.
    pub fn variance(&self) -> Option<f64> {
        if !self.is_ready() {
            return None;
        }
        // lag 0 sits just before `next`; older lags wrap around
        let (recent, older) = self.squares.split_at(self.next);
        let (w_recent, w_older) = self.weights.split_at(self.next);
        let a: f64 = recent.iter().rev().zip(w_recent).map(|(s, w)| s * w).sum();
        let b: f64 = older.iter().rev().zip(w_older).map(|(s, w)| s * w).sum();
        Some(a + b)
    }
}

fn check_length(returns: &ReturnSeries, kernel: &KernelWeights) -> Result<()> {
    if returns.len() <= kernel.l_max() {
        return Err(Error::InsufficientData(format!(
            "{} returns do not cover the kernel support of {} lags",
            returns.len(),
            kernel.len()
        )));
    }
    Ok(())
}

/// Linear ARCH variance forecasts, evaluated incrementally.
pub fn linear_variance(returns: &ReturnSeries, kernel: &KernelWeights) -> Result<VarianceForecast> {
    check_length(returns, kernel)?;
    let mut filter = VarianceFilter::new(kernel);
    let mut variance = Vec::with_capacity(returns.len() - kernel.l_max());
    for &r in returns.returns() {
        filter.push(r);
        if let Some(v) = filter.variance() {
            variance.push(v);
        }
    }
    Ok(VarianceForecast {
        dates: returns.dates()[kernel.l_max()..].to_vec(),
        variance,
        warm_up: kernel.l_max(),
    })
}

/// Reference `O(n · l_max)` convolution for the same forecasts as
/// [`linear_variance`].
pub fn linear_variance_direct(returns: &ReturnSeries, kernel: &KernelWeights) -> Result<VarianceForecast> {
    check_length(returns, kernel)?;
    let r = returns.returns();
    let w = kernel.weights();
    let variance = (kernel.l_max()..r.len())
        .map(|t| (0..w.len()).map(|l| w[l] * r[t - l] * r[t - l]).sum())
        .collect();
    Ok(VarianceForecast {
        dates: returns.dates()[kernel.l_max()..].to_vec(),
        variance,
        warm_up: kernel.l_max(),
    })
}

/// Mean-reversion parameters of the affine estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineParams {
    /// Convex weight of the long-run variance, in `[0, 1]`.
    pub w_inf: f64,
    /// Long-run volatility per day.
    pub sigma_inf: f64,
}

impl AffineParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.w_inf) {
            return Err(Error::InvalidParameter(format!("w_inf must lie in [0, 1], got {}", self.w_inf)));
        }
        if !(self.sigma_inf >= 0.0 && self.sigma_inf.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma_inf must be nonnegative, got {}", self.sigma_inf)));
        }
        Ok(())
    }

    /// `w_inf · sigma_inf^2 + (1 - w_inf) · linear`
    pub fn apply(&self, linear: f64) -> f64 {
        self.w_inf * self.sigma_inf * self.sigma_inf + (1.0 - self.w_inf) * linear
    }
}

pub fn affine_variance(lin: &VarianceForecast, params: &AffineParams) -> Result<VarianceForecast> {
    params.validate()?;
    Ok(VarianceForecast {
        dates: lin.dates.clone(),
        variance: lin.variance.iter().map(|v| params.apply(*v)).collect(),
        warm_up: lin.warm_up,
    })
}

/// Multiple of the sample variance that `sigma_inf^2` must take for an
/// affine estimator to absorb an innovation-variance excess `gamma`:
/// `1 + gamma / w_inf`.
pub fn implied_sigma_inf_factor(gamma: f64, w_inf: f64) -> Result<f64> {
    if !(w_inf > 0.0) {
        return Err(Error::Domain(format!("w_inf must be positive to absorb an excess, got {w_inf}")));
    }
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be nonnegative, got {gamma}")));
    }
    Ok(1.0 + gamma / w_inf)
}
