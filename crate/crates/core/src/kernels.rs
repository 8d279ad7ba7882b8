//! Lag-weight profiles `w(l)` for the quadratic variance estimators.
//!
//! Every kernel lives on a finite support `l = 0..=l_max` and is renormalized
//! after truncation, so the weights are nonnegative and sum to one.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default lag cutoff for the exponential kernel when none is given.
pub const DEFAULT_EMA_LMAX: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Rma,
    Ema,
    LmArch,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Rma => "RMA",
            KernelKind::Ema => "EMA",
            KernelKind::LmArch => "LMARCH",
        })
    }
}

/// Normalized lag weights, indexed by lag (`weights()[0]` multiplies the
/// most recent squared return).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    kind: KernelKind,
    weights: Vec<f64>,
}

impl KernelWeights {
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn l_max(&self) -> usize {
        self.weights.len() - 1
    }

    /// Number of lags in the support, `l_max + 1`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Rectangular moving average: `n` equal weights `1/n`.
pub fn rma_weights(n: usize) -> Result<KernelWeights> {
    if n == 0 {
        return Err(Error::InvalidParameter("RMA window length must be at least 1".into()));
    }
    Ok(KernelWeights {
        kind: KernelKind::Rma,
        weights: vec![1.0 / n as f64; n],
    })
}

/// Exponential moving average, `w(l) ∝ mu^l` on `0..=l_max`.
pub fn ema_weights(mu: f64, l_max: usize) -> Result<KernelWeights> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidParameter(format!("EMA decay factor must lie in (0, 1), got {mu}")));
    }
    Ok(KernelWeights {
        kind: KernelKind::Ema,
        weights: normalize((0..=l_max).map(|l| mu.powi(l as i32)).collect()),
    })
}

fn normalize(mut raw: Vec<f64>) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter_mut().for_each(|w| *w /= total);
    raw
}

/// Parameters of the long-memory kernel: `K` exponential components with
/// characteristic times `tau1 * rho^(k-1)` and coefficients decaying
/// logarithmically towards `tau0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmArchParams {
    pub tau1: f64,
    pub rho: f64,
    pub components: usize,
    pub tau0: f64,
    pub l_max: usize,
}

impl Default for LmArchParams {
    fn default() -> Self {
        Self {
            tau1: 4.0,
            rho: std::f64::consts::SQRT_2,
            components: 15,
            tau0: 1560.0,
            l_max: 512,
        }
    }
}

impl LmArchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau1 > 0.0 && self.tau1.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau1 must be positive, got {}", self.tau1)));
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must exceed 1, got {}", self.rho)));
        }
        if self.components == 0 {
            return Err(Error::InvalidParameter("at least one component is required".into()));
        }
        let tau_max = self.tau1 * self.rho.powi(self.components as i32 - 1);
        if !(self.tau0 > tau_max) {
            return Err(Error::InvalidParameter(format!(
                "tau0 = {} must exceed the longest component time {tau_max}",
                self.tau0
            )));
        }
        Ok(())
    }

    /// Characteristic times `tau_k` of the components.
    pub fn taus(&self) -> Vec<f64> {
        (0..self.components)
            .map(|k| self.tau1 * self.rho.powi(k as i32))
            .collect()
    }

    /// Component coefficients `c_k ∝ 1 - ln(tau_k) / ln(tau0)`, summing to one.
    pub fn coefficients(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let ln_tau0 = self.tau0.ln();
        let raw: Vec<f64> = self.taus().iter().map(|t| 1.0 - t.ln() / ln_tau0).collect();
        if let Some((k, c)) = raw.iter().enumerate().find(|(_, c)| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "component {} has non-positive coefficient {c}; tau0 = {} is too small",
                k + 1,
                self.tau0
            )));
        }
        Ok(normalize(raw))
    }
}

/// Long-memory kernel `w(l) = Σ_k c_k (1 - mu_k) mu_k^l`, truncated at
/// `l_max` and renormalized.
pub fn lm_arch_weights(params: &LmArchParams) -> Result<KernelWeights> {
    let coefficients = params.coefficients()?;
    let decays: Vec<f64> = params.taus().iter().map(|t| (-1.0 / t).exp()).collect();
    let raw = (0..=params.l_max)
        .map(|l| {
            coefficients
                .iter()
                .zip(&decays)
                .map(|(c, mu)| c * (1.0 - mu) * mu.powi(l as i32))
                .sum()
        })
        .collect();
    Ok(KernelWeights {
        kind: KernelKind::LmArch,
        weights: normalize(raw),
    })
}

/// Decomposes the truncated long-memory kernel into its exponential
/// components: returns `(a_k, ema_k)` with `Σ a_k = 1` and
/// `lm_arch_weights(params) = Σ_k a_k · ema_k` elementwise.
///
/// The effective mixture weights `a_k` differ from the nominal `c_k`
/// because truncation removes more mass from the slow components.
pub fn lm_arch_components(params: &LmArchParams) -> Result<Vec<(f64, KernelWeights)>> {
    let coefficients = params.coefficients()?;
    let support = params.l_max as i32 + 1;
    let retained: Vec<f64> = params
        .taus()
        .iter()
        .zip(&coefficients)
        .map(|(t, c)| {
            let mu = (-1.0 / t).exp();
            c * (1.0 - mu.powi(support))
        })
        .collect();
    let total: f64 = retained.iter().sum();
    params
        .taus()
        .iter()
        .zip(retained)
        .map(|(t, m)| Ok((m / total, ema_weights((-1.0 / t).exp(), params.l_max)?)))
        .collect()
}

/// Textual kernel configuration: `rma:<n>`, `ema:<mu>[:<lmax>]` or
/// `lmarch[:<tau1>,<rho>,<K>,<tau0>,<lmax>]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Rma { n: usize },
    Ema { mu: f64, l_max: usize },
    LmArch(LmArchParams),
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::LmArch(LmArchParams::default())
    }
}

impl KernelSpec {
    pub fn build(&self) -> Result<KernelWeights> {
        match self {
            KernelSpec::Rma { n } => rma_weights(*n),
            KernelSpec::Ema { mu, l_max } => ema_weights(*mu, *l_max),
            KernelSpec::LmArch(p) => lm_arch_weights(p),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Rma { n } => write!(f, "rma:{n}"),
            KernelSpec::Ema { mu, l_max } => write!(f, "ema:{mu}:{l_max}"),
            KernelSpec::LmArch(p) => write!(
                f,
                "lmarch:{},{},{},{},{}",
                p.tau1, p.rho, p.components, p.tau0, p.l_max
            ),
        }
    }
}

fn parse_field<T: FromStr>(spec: &str, field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("kernel spec `{spec}`: cannot parse {what} from `{field}`")))
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = match s.split_once(':') {
            Some((name, rest)) => (name, Some(rest)),
            None => (s, None),
        };
        match (name.to_ascii_lowercase().as_str(), rest) {
            ("rma", Some(n)) => Ok(KernelSpec::Rma { n: parse_field(s, n, "window length")? }),
            ("ema", Some(rest)) => {
                let (mu, l_max) = match rest.split_once(':') {
                    Some((mu, l_max)) => (mu, parse_field(s, l_max, "lmax")?),
                    None => (rest, DEFAULT_EMA_LMAX),
                };
                Ok(KernelSpec::Ema { mu: parse_field(s, mu, "decay factor")?, l_max })
            }
            ("lmarch", None) => Ok(KernelSpec::LmArch(LmArchParams::default())),
            ("lmarch", Some(rest)) => {
                let fields: Vec<&str> = rest.split(',').collect();
                if fields.len() != 5 {
                    return Err(Error::InvalidParameter(format!(
                        "kernel spec `{s}`: expected lmarch:<tau1>,<rho>,<K>,<tau0>,<lmax>"
                    )));
                }
                Ok(KernelSpec::LmArch(LmArchParams {
                    tau1: parse_field(s, fields[0], "tau1")?,
                    rho: parse_field(s, fields[1], "rho")?,
                    components: parse_field(s, fields[2], "K")?,
                    tau0: parse_field(s, fields[3], "tau0")?,
                    l_max: parse_field(s, fields[4], "lmax")?,
                }))
            }
            _ => Err(Error::InvalidParameter(format!(
                "unknown kernel spec `{s}` (expected rma:<n>, ema:<mu>[:<lmax>] or lmarch[:...])"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_normalized(k: &KernelWeights) {
        assert!(k.weights().iter().all(|w| *w >= 0.0));
        assert!((k.sum() - 1.0).abs() <= 1e-12, "sum = {}", k.sum());
    }

    #[test]
    fn rma_examples() {
        let k = rma_weights(500).unwrap();
        assert_eq!(k.len(), 500);
        assert!(k.weights().iter().all(|w| *w == 0.002));
        assert_normalized(&k);
        assert_eq!(rma_weights(1).unwrap().weights(), &[1.0]);
        assert_eq!(rma_weights(4).unwrap().weights(), &[0.25; 4]);
        assert!(matches!(rma_weights(0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn ema_examples() {
        let k = ema_weights(0.5, 2).unwrap();
        let expected = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        for (w, e) in k.weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-15);
        }
        assert_eq!(ema_weights(0.3, 0).unwrap().weights(), &[1.0]);
        assert_eq!(ema_weights(0.94, 0).unwrap().weights(), &[1.0]);
        for bad in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(ema_weights(bad, 10).is_err());
        }
    }

    #[test]
    fn ema_ratio_is_the_decay_factor() {
        for mu in [0.9, 0.94, 0.97] {
            let k = ema_weights(mu, 400).unwrap();
            assert_normalized(&k);
            for pair in k.weights().windows(2) {
                assert!((pair[1] / pair[0] - mu).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn lm_arch_defaults_are_normalized_and_decreasing() {
        let k = lm_arch_weights(&LmArchParams::default()).unwrap();
        assert_eq!(k.kind(), KernelKind::LmArch);
        assert_eq!(k.l_max(), 512);
        assert_normalized(&k);
        assert!(k.weights().windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn lm_arch_single_component_is_ema() {
        let params = LmArchParams { tau1: 7.0, components: 1, tau0: 100.0, l_max: 200, ..Default::default() };
        let lm = lm_arch_weights(&params).unwrap();
        let ema = ema_weights((-1.0f64 / 7.0).exp(), 200).unwrap();
        for (a, b) in lm.weights().iter().zip(ema.weights()) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn lm_arch_is_mixture_of_its_components() {
        let params = LmArchParams::default();
        let lm = lm_arch_weights(&params).unwrap();
        let parts = lm_arch_components(&params).unwrap();
        assert_eq!(parts.len(), 15);
        assert!((parts.iter().map(|(a, _)| a).sum::<f64>() - 1.0).abs() < 1e-14);
        for (l, w) in lm.weights().iter().enumerate() {
            let mixed: f64 = parts.iter().map(|(a, k)| a * k.weights()[l]).sum();
            assert!((w - mixed).abs() <= 1e-14, "lag {l}: {w} vs {mixed}");
        }
    }

    #[test]
    fn lm_arch_rejects_small_tau0() {
        let params = LmArchParams { tau0: 100.0, ..Default::default() };
        assert!(matches!(lm_arch_weights(&params), Err(Error::InvalidParameter(_))));
        // tau0 below one flips the sign of ln(tau0)
        let params = LmArchParams { tau1: 0.1, rho: 1.5, components: 2, tau0: 0.5, l_max: 10 };
        assert!(lm_arch_weights(&params).is_err());
        assert!(lm_arch_weights(&LmArchParams { rho: 1.0, ..Default::default() }).is_err());
        assert!(lm_arch_weights(&LmArchParams { components: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn spec_strings() {
        assert_eq!("rma:500".parse::<KernelSpec>().unwrap(), KernelSpec::Rma { n: 500 });
        assert_eq!(
            "ema:0.94".parse::<KernelSpec>().unwrap(),
            KernelSpec::Ema { mu: 0.94, l_max: DEFAULT_EMA_LMAX }
        );
        assert_eq!("ema:0.5:2".parse::<KernelSpec>().unwrap(), KernelSpec::Ema { mu: 0.5, l_max: 2 });
        assert_eq!("lmarch".parse::<KernelSpec>().unwrap(), KernelSpec::default());
        let custom: KernelSpec = "lmarch:2,2,3,100,64".parse().unwrap();
        assert_eq!(custom.build().unwrap().len(), 65);
        for spec in [KernelSpec::default(), custom, KernelSpec::Ema { mu: 0.94, l_max: 300 }] {
            assert_eq!(spec.to_string().parse::<KernelSpec>().unwrap(), spec);
        }
        for bad in ["", "rma", "rma:x", "ema:0.9:y", "lmarch:1,2", "garch:1"] {
            assert!(bad.parse::<KernelSpec>().is_err(), "{bad}");
        }
    }
}
