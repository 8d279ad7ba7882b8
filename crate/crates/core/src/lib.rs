//! Quadratic ARCH volatility estimation, realized innovations and the
//! significance tests on their mean and variance.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernels`]: lag-weight profiles (rectangular, exponential, long memory)
//! - [`volatility`]: linear and affine one-step variance forecasts
//! - [`innovations`]: inversion of the return equation into realized innovations
//! - [`stats`]: moment estimators, `var(eps^2)`, z-scores and p-values
//! - [`simulate`]: seeded generators for linear, affine, unstable and
//!   mean-reverting ARCH paths
//! - [`pipeline`]: CSV ingestion, end-to-end analysis and report rendering

pub mod error;
pub mod innovations;
pub mod kernels;
pub mod pipeline;
pub mod series;
pub mod simulate;
pub mod stats;
pub mod volatility;

pub use error::{Error, Result};
pub use innovations::{extract_innovations, horizon_innovations, InnovationSeries};
pub use kernels::{ema_weights, lm_arch_weights, rma_weights, KernelKind, KernelSpec, KernelWeights, LmArchParams};
pub use series::{PriceSeries, ReturnKind, ReturnSeries};
pub use stats::{InnovationDistribution, MomentSummary, TestResult};
pub use volatility::{affine_variance, linear_variance, AffineParams, VarianceForecast};
