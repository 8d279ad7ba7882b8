//! Seeded generators for quadratic ARCH price paths.
//!
//! Each step draws one innovation and applies
//!
//! ```text
//! r(t+1) = ou(t) + (1 + gamma) · sigma(t) · eps(t+1)
//! ```
//!
//! where `sigma(t)^2` is the linear (or affine) forecast from the path's own
//! past returns and `ou(t) = -(p(t) - p(t-n)) / (sqrt(n) p(t-n)) / tau` is
//! the optional pull-back towards the lagged price. Prices are generated in
//! log space. Before the first step the kernel support is filled with
//! i.i.d. draws of variance `init_variance`; the returns whose forecast still
//! touches these pre-sample draws are the warm-up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::KernelWeights;
use crate::series::{business_days, default_epoch, PriceSeries, ReturnSeries};
use crate::stats::InnovationDistribution;
use crate::volatility::{AffineParams, VarianceFilter};

/// Unit-variance innovation sampler.
#[derive(Debug, Clone)]
pub enum InnovationSampler {
    Normal,
    /// `Z / sqrt(X / nu)` with `X ~ chi^2(nu)`, rescaled by `sqrt((nu-2)/nu)`.
    Student { chi: ChiSquared<f64>, nu: f64 },
}

impl InnovationSampler {
    pub fn new(dist: InnovationDistribution) -> Result<Self> {
        match dist {
            InnovationDistribution::Normal => Ok(InnovationSampler::Normal),
            InnovationDistribution::Student { nu } => {
                if !(nu > 2.0 && nu.is_finite()) {
                    return Err(Error::Domain(format!("unit-variance Student sampling needs nu > 2, got {nu}")));
                }
                let chi = ChiSquared::new(nu).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Ok(InnovationSampler::Student { chi, nu })
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        match self {
            InnovationSampler::Normal => z,
            InnovationSampler::Student { chi, nu } => z * ((nu - 2.0) / chi.sample(rng)).sqrt(),
        }
    }
}

/// Draws one zero-mean, unit-variance innovation.
pub fn draw_innovation<R: Rng + ?Sized>(dist: InnovationDistribution, rng: &mut R) -> Result<f64> {
    Ok(InnovationSampler::new(dist)?.sample(rng))
}

/// Pull-back of the return towards the price `n_lag` days earlier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    /// Intensity time scale in days; larger is weaker.
    pub tau: f64,
    pub n_lag: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub kernel: KernelWeights,
    /// Total mass of the kernel. 1 for a consistent process; other values
    /// produce the collapsing (< 1) or exploding (> 1) regimes.
    pub weight_sum: f64,
    pub affine: Option<AffineParams>,
    /// Short-term instability, the innovation multiplier is `1 + gamma`.
    pub gamma: f64,
    pub ou: Option<OuParams>,
    pub dist: InnovationDistribution,
    /// Variance per day of the pre-sample returns.
    pub init_variance: f64,
    pub p0: f64,
}

impl ProcessSpec {
    /// Linear process with normal innovations, 1% daily volatility and `p0 = 100`.
    pub fn linear(kernel: KernelWeights) -> Self {
        Self {
            kernel,
            weight_sum: 1.0,
            affine: None,
            gamma: 0.0,
            ou: None,
            dist: InnovationDistribution::Normal,
            init_variance: 1e-4,
            p0: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.weight_sum > 0.0 && self.weight_sum.is_finite()) {
            return invalid(format!("weight_sum must be positive, got {}", self.weight_sum));
        }
        if let Some(affine) = &self.affine {
            affine.validate()?;
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return invalid(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if let Some(ou) = &self.ou {
            if !(ou.tau > 0.0) {
                return invalid(format!("OU tau must be positive, got {}", ou.tau));
            }
            if ou.n_lag == 0 {
                return invalid("OU lag must be at least one day".into());
            }
        }
        if !(self.init_variance >= 0.0 && self.init_variance.is_finite()) {
            return invalid(format!("init_variance must be nonnegative, got {}", self.init_variance));
        }
        if !(self.p0 > 0.0 && self.p0.is_finite()) {
            return invalid(format!("p0 must be positive, got {}", self.p0));
        }
        InnovationSampler::new(self.dist)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    log_prices: Vec<f64>,
    returns: ReturnSeries,
    true_variance: Vec<f64>,
    drawn_eps: Vec<f64>,
    warm_up: usize,
}

impl SimulatedPath {
    /// `ln p`, starting with `ln p0`; one more entry than there are returns.
    pub fn log_prices(&self) -> &[f64] {
        &self.log_prices
    }

    /// Log returns, one per step.
    pub fn returns(&self) -> &ReturnSeries {
        &self.returns
    }

    /// Variance forecast used to scale each step's innovation (before the
    /// `1 + gamma` multiplier).
    pub fn true_variance(&self) -> &[f64] {
        &self.true_variance
    }

    pub fn drawn_eps(&self) -> &[f64] {
        &self.drawn_eps
    }

    /// Index of the first return whose forecast uses only simulated returns.
    pub fn warm_up(&self) -> usize {
        self.warm_up
    }

    pub fn steps(&self) -> usize {
        self.drawn_eps.len()
    }

    /// Prices on business days, failing if they left the floating-point range.
    pub fn prices(&self, name: &str) -> Result<PriceSeries> {
        let dates = business_days(default_epoch(), self.log_prices.len());
        PriceSeries::new(name, dates, self.log_prices.iter().map(|lp| lp.exp()).collect())
    }
}

/// Generates `steps` returns of the process described by `spec`.
pub fn simulate(spec: &ProcessSpec, steps: usize, seed: u64) -> Result<SimulatedPath> {
    spec.validate()?;
    let sampler = InnovationSampler::new(spec.dist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut filter = VarianceFilter::with_mass(&spec.kernel, spec.weight_sum);
    let init_sd = spec.init_variance.sqrt();
    for _ in 0..spec.kernel.len() {
        filter.push(init_sd * sampler.sample(&mut rng));
    }

    let scale = 1.0 + spec.gamma;
    let mut log_prices = Vec::with_capacity(steps + 1);
    log_prices.push(spec.p0.ln());
    let mut returns = Vec::with_capacity(steps);
    let mut true_variance = Vec::with_capacity(steps);
    let mut drawn_eps = Vec::with_capacity(steps);
    for t in 0..steps {
        let linear = filter.variance().expect("pre-sample fills the kernel");
        let variance = match &spec.affine {
            Some(affine) => affine.apply(linear),
            None => linear,
        };
        let pull = match &spec.ou {
            // lagged prices before the start sit at p0
            Some(ou) => {
                let lagged = log_prices[t.saturating_sub(ou.n_lag)];
                -(log_prices[t] - lagged).exp_m1() / ((ou.n_lag as f64).sqrt() * ou.tau)
            }
            None => 0.0,
        };
        let eps = sampler.sample(&mut rng);
        let r = pull + scale * variance.sqrt() * eps;
        let next = log_prices[t] + r;
        if !next.is_finite() {
            return Err(Error::Domain(format!("simulated path diverged at step {t}")));
        }
        filter.push(r);
        log_prices.push(next);
        returns.push(r);
        true_variance.push(variance);
        drawn_eps.push(eps);
    }

    let dates = business_days(default_epoch(), steps + 1);
    Ok(SimulatedPath {
        log_prices,
        returns: ReturnSeries::new(dates[1..].to_vec(), returns)?,
        true_variance,
        drawn_eps,
        warm_up: spec.kernel.len().min(steps),
    })
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(what.into()))
    }
}

/// Linear ARCH path: no affine part, no instability, no pull-back.
pub fn simulate_linear_arch(spec: &ProcessSpec, steps: usize, seed: u64) -> Result<SimulatedPath> {
    require(
        spec.affine.is_none() && spec.gamma == 0.0 && spec.ou.is_none(),
        "linear ARCH takes neither affine, gamma nor OU terms",
    )?;
    simulate(spec, steps, seed)
}

pub fn simulate_affine_arch(spec: &ProcessSpec, steps: usize, seed: u64) -> Result<SimulatedPath> {
    require(spec.affine.is_some(), "affine ARCH requires affine parameters")?;
    simulate(spec, steps, seed)
}

pub fn simulate_ou_arch(spec: &ProcessSpec, steps: usize, seed: u64) -> Result<SimulatedPath> {
    require(spec.ou.is_some(), "OU-stabilized ARCH requires OU parameters")?;
    simulate(spec, steps, seed)
}

/// Seed of replica `index` derived from `master` (SplitMix64 finalizer).
pub fn replica_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `f(index, seed)` for every replica in parallel, results in replica order.
pub fn run_replicas<T, F>(replicas: usize, master_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    (0..replicas)
        .into_par_iter()
        .map(|i| f(i, replica_seed(master_seed, i as u64)))
        .collect()
}
