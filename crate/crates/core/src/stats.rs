//! Moment estimators for innovations and the large-sample tests of
//! `mean = 0` (two-sided) and `variance = 1` (one-sided).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Distributional assumption for the innovations. Student distributions are
/// rescaled to unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnovationDistribution {
    Normal,
    Student { nu: f64 },
}

impl InnovationDistribution {
    pub fn student(nu: f64) -> Self {
        InnovationDistribution::Student { nu }
    }

    /// Column label used in reports: `Normal`, `St 6`, ...
    pub fn label(&self) -> String {
        match self {
            InnovationDistribution::Normal => "Normal".into(),
            InnovationDistribution::Student { nu } => format!("St {nu}"),
        }
    }
}

impl fmt::Display for InnovationDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnovationDistribution::Normal => f.write_str("normal"),
            InnovationDistribution::Student { nu } => write!(f, "st{nu}"),
        }
    }
}

impl FromStr for InnovationDistribution {
    type Err = Error;

    /// Accepts `normal` and `st<nu>` (also `student<nu>`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "normal" || s == "gaussian" {
            return Ok(InnovationDistribution::Normal);
        }
        let nu = s
            .strip_prefix("student")
            .or_else(|| s.strip_prefix("st"))
            .and_then(|nu| nu.trim_start_matches(':').parse::<f64>().ok())
            .filter(|nu| *nu > 0.0 && nu.is_finite())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown distribution `{s}` (normal|st<nu>)")))?;
        Ok(InnovationDistribution::Student { nu })
    }
}

/// Parses a comma separated list such as `st6,st5,normal`.
pub fn parse_distributions(list: &str) -> Result<Vec<InnovationDistribution>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub n: usize,
    pub mu_hat: f64,
    /// Mean-subtracted variance with the `1/(n-1)` normalization.
    pub var_hat: f64,
    /// Mean-free size estimator `Σ eps^2 / (n-1)`.
    pub second_moment: f64,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Mean, variance and mean-free second moment in a single pass.
pub fn moments(eps: &[f64]) -> Result<MomentSummary> {
    let n = eps.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("moments need at least 2 innovations, got {n}")));
    }
    // Welford for the centered moment, compensated sums for the raw ones
    let mut mean = 0.0;
    let mut m2 = CompensatedSum::default();
    let mut total = CompensatedSum::default();
    let mut squares = CompensatedSum::default();
    for (i, &x) in eps.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2.add(delta * (x - mean));
        total.add(x);
        squares.add(x * x);
    }
    let denom = (n - 1) as f64;
    Ok(MomentSummary {
        n,
        mu_hat: total.value() / n as f64,
        var_hat: m2.value().max(0.0) / denom,
        second_moment: squares.value() / denom,
    })
}

/// Sampling variance of `eps^2` for a unit-variance distribution:
/// `2` for the normal, `2 (nu - 1) / (nu - 4)` for a Student.
pub fn var_eps_squared(dist: InnovationDistribution) -> Result<f64> {
    match dist {
        InnovationDistribution::Normal => Ok(2.0),
        InnovationDistribution::Student { nu } => {
            if !(nu > 4.0) {
                return Err(Error::Singularity { nu });
            }
            Ok(2.0 * (nu - 1.0) / (nu - 4.0))
        }
    }
}

/// Kurtosis `3 + 6 / (nu - 4)` of a Student distribution.
pub fn student_kurtosis(nu: f64) -> Result<f64> {
    if !(nu > 4.0) {
        return Err(Error::Domain(format!("Student kurtosis is infinite for nu = {nu} <= 4")));
    }
    Ok(3.0 + 6.0 / (nu - 4.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sided {
    OneSided,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub z: f64,
    pub p: f64,
    pub sided: Sided,
    pub assumption: InnovationDistribution,
}

/// Standard normal cdf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    normal_cdf(-x)
}

/// Two-sided test of a zero mean: `z = mu_hat · sqrt(n)`,
/// `p = 2 (1 - Φ(|z|))`. The CLT makes this independent of the innovation
/// distribution, which is recorded as normal.
pub fn mean_test(mu_hat: f64, n: usize) -> TestResult {
    let z = mu_hat * (n as f64).sqrt();
    TestResult {
        z,
        p: (2.0 * normal_sf(z.abs())).min(1.0),
        sided: Sided::TwoSided,
        assumption: InnovationDistribution::Normal,
    }
}

/// One-sided test of a unit variance:
/// `z = (var_hat - 1) / sqrt(var(eps^2) / n)`, `p = 1 - Φ(z)`.
pub fn variance_test(var_hat: f64, n: usize, dist: InnovationDistribution) -> Result<TestResult> {
    if n < 2 {
        return Err(Error::InsufficientData(format!("variance test needs n >= 2, got {n}")));
    }
    let z = (var_hat - 1.0) / (var_eps_squared(dist)? / n as f64).sqrt();
    Ok(TestResult { z, p: normal_sf(z), sided: Sided::OneSided, assumption: dist })
}

/// Business days for the expected volatility to double when the expected
/// variance grows by `1 + excess` per day: `ln 4 / ln(1 + excess)`.
pub fn volatility_doubling_time(excess: f64) -> Result<f64> {
    if !(excess > 0.0 && excess.is_finite()) {
        return Err(Error::Domain(format!("no doubling for a variance excess of {excess}")));
    }
    Ok(4f64.ln() / excess.ln_1p())
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `samples` and the uniform law on `[0, 1]`.
pub fn ks_uniform_distance(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_examples() {
        let m = moments(&[1.0, -1.0]).unwrap();
        assert_eq!((m.n, m.mu_hat, m.var_hat, m.second_moment), (2, 0.0, 2.0, 2.0));
        let m = moments(&[0.3; 7]).unwrap();
        assert!((m.mu_hat - 0.3).abs() < 1e-16);
        assert!(m.var_hat.abs() < 1e-16);
        assert!((m.second_moment - 7.0 * 0.09 / 6.0).abs() < 1e-15);
        assert!(matches!(moments(&[1.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn var_eps_squared_closed_forms() {
        assert_eq!(var_eps_squared(InnovationDistribution::Normal).unwrap(), 2.0);
        assert_eq!(var_eps_squared(InnovationDistribution::student(6.0)).unwrap(), 5.0);
        assert_eq!(var_eps_squared(InnovationDistribution::student(5.0)).unwrap(), 8.0);
        assert!(matches!(var_eps_squared(InnovationDistribution::student(4.0)), Err(Error::Singularity { .. })));
        assert!(var_eps_squared(InnovationDistribution::student(3.0)).is_err());
    }

    #[test]
    fn var_eps_squared_decreases_to_normal() {
        let mut prev = f64::INFINITY;
        for nu in [4.5, 5.0, 6.0, 10.0, 100.0, 1e4, 1e8] {
            let v = var_eps_squared(InnovationDistribution::student(nu)).unwrap();
            assert!(v < prev && v > 2.0);
            prev = v;
        }
        assert!((prev - 2.0).abs() < 1e-7);
    }

    #[test]
    fn kurtosis() {
        assert_eq!(student_kurtosis(6.0).unwrap(), 6.0);
        assert_eq!(student_kurtosis(8.0).unwrap(), 4.5);
        assert!((student_kurtosis(1e9).unwrap() - 3.0).abs() < 1e-8);
        assert!(student_kurtosis(4.0).is_err());
        // var(eps^2) = kurt - 1
        let v = var_eps_squared(InnovationDistribution::student(7.0)).unwrap();
        assert!((student_kurtosis(7.0).unwrap() - 1.0 - v).abs() < 1e-15);
    }

    #[test]
    fn mean_test_examples() {
        assert!(mean_test(0.035, 14546).p < 5e-4);
        let t = mean_test(0.0, 100);
        assert_eq!((t.z, t.p, t.sided), (0.0, 1.0, Sided::TwoSided));
        assert!((mean_test(0.013, 7630).p - 0.248).abs() < 0.02);
        assert_eq!(mean_test(-0.02, 5000).p, mean_test(0.02, 5000).p);
    }

    #[test]
    fn variance_test_examples() {
        let st6 = variance_test(1.060, 14546, InnovationDistribution::student(6.0)).unwrap();
        assert!((st6.p - 0.001).abs() <= 0.003);
        let st5 = variance_test(1.060, 14546, InnovationDistribution::student(5.0)).unwrap();
        assert!((st5.p - 0.005).abs() <= 0.003);
        let null = variance_test(1.0, 1000, InnovationDistribution::Normal).unwrap();
        assert_eq!((null.z, null.p, null.sided), (0.0, 0.5, Sided::OneSided));
        assert!(variance_test(1.1, 1000, InnovationDistribution::student(4.0)).is_err());
    }

    #[test]
    fn doubling_time() {
        assert!((volatility_doubling_time(0.05).unwrap() - 28.4).abs() < 0.1);
        assert!((volatility_doubling_time(3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((volatility_doubling_time(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(volatility_doubling_time(0.0).is_err());
        assert!(volatility_doubling_time(-0.1).is_err());
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert_eq!(normal_cdf(0.0), 0.5);
        for i in -80..=80 {
            let x = i as f64 * 0.1;
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
        }
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
    }

    #[test]
    fn distribution_parsing() {
        let d = parse_distributions("st6, st5,normal").unwrap();
        assert_eq!(
            d,
            vec![InnovationDistribution::student(6.0), InnovationDistribution::student(5.0), InnovationDistribution::Normal]
        );
        assert_eq!(d[0].label(), "St 6");
        assert_eq!("student4.5".parse::<InnovationDistribution>().unwrap(), InnovationDistribution::student(4.5));
        assert!("cauchy".parse::<InnovationDistribution>().is_err());
        assert!("st-1".parse::<InnovationDistribution>().is_err());
    }

    #[test]
    fn ks_distance() {
        let grid: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_uniform_distance(&grid) - 0.005).abs() < 1e-12);
        assert!((ks_uniform_distance(&[0.0; 10]) - 1.0).abs() < 1e-12);
    }
}
