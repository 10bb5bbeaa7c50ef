//! Frequency and confidence estimates from chains, plus the closed-form
//! moments of the per-chain survival statistics.
//!
//! For a pattern `s` and chain `m`, `k` is the survival depth of `s` and
//! `χ = 1{k < D_m}` flags that `s` died before the chain ended. Each chain
//! contributes `p^k (1 - p)^χ` to the likelihood, so the maximum-likelihood
//! frequency is `K / (K + I)` with `K = Σ k` and `I = Σ χ`.
//!
//! `D_m` is the chain's realized length, not the configured maximum: a
//! pattern alive in the tail of an early-stopped chain is censored there.
//!
//! The asymptotic variance of `√M (p̂ - p)` is `p (1 - p)² / (1 - p^D)`. This
//! reduces to the Bernoulli variance `p (1 - p)` at `D = 1`, which pins down
//! the form; the Monte-Carlo suite checks it on a grid.

use serde::{Deserialize, Serialize};

use crate::chain::ChainSet;
use crate::dataset::{ClassId, ClassPrior};
use crate::error::{Error, Result};
use crate::pattern::Pattern;

/// Sufficient statistics of one pattern over one chain set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivalStats {
    /// `K = Σ_m k_m`
    pub k_total: u64,
    /// `I = Σ_m 1{k_m < D_m}`
    pub i_total: u64,
    pub m: usize,
}

impl SurvivalStats {
    pub fn mean_k(&self) -> f64 {
        self.k_total as f64 / self.m as f64
    }

    pub fn mean_chi(&self) -> f64 {
        self.i_total as f64 / self.m as f64
    }

    /// `K / (K + I)`, exactly 0 or 1 at the boundaries.
    pub fn frequency(&self) -> Result<f64> {
        match (self.k_total, self.i_total) {
            (0, 0) => Err(Error::FrequencyUndefined),
            (0, _) => Ok(0.0),
            (_, 0) => Ok(1.0),
            (k, i) => Ok(k as f64 / (k + i) as f64),
        }
    }
}

pub fn survival_stats(cs: &ChainSet, s: &Pattern) -> SurvivalStats {
    let mut stats = SurvivalStats {
        m: cs.len(),
        ..Default::default()
    };
    for ch in &cs.chains {
        let k = ch.survival_depth(s);
        stats.k_total += k as u64;
        stats.i_total += (k < ch.realized_length()) as u64;
    }
    stats
}

/// Maximum-likelihood frequency of `s` in the class the chains were drawn from.
pub fn frequency(cs: &ChainSet, s: &Pattern) -> Result<f64> {
    if cs.is_empty() {
        return Err(Error::param("chain set is empty"));
    }
    survival_stats(cs, s).frequency()
}

/// Posterior of `target` given the pattern, from per-class frequency
/// estimates (indexed by class) and class priors.
pub fn confidence(freqs: &[f64], priors: &ClassPrior, target: ClassId) -> Result<f64> {
    if freqs.len() != priors.len() {
        return Err(Error::param(format!(
            "{} frequency estimates for {} classes",
            freqs.len(),
            priors.len()
        )));
    }
    let t = target.index();
    if t >= freqs.len() {
        return Err(Error::UnknownClass(target.0.to_string()));
    }
    let marginal = marginal_support(freqs, priors);
    if marginal <= 0.0 {
        return Err(Error::ConfidenceUndefined);
    }
    Ok(freqs[t] * priors.priors[t] / marginal)
}

/// `Σ_c p̂^(c) p^(c)`
pub fn marginal_support(freqs: &[f64], priors: &ClassPrior) -> f64 {
    freqs.iter().zip(&priors.priors).map(|(f, p)| f * p).sum()
}

fn check_p_below_one(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::param(format!("frequency {p} must lie in [0, 1)")));
    }
    Ok(())
}

fn check_depth(d: u32) -> Result<i32> {
    if d == 0 {
        return Err(Error::param("chain length must be at least 1"));
    }
    i32::try_from(d).map_err(|_| Error::param("chain length too large"))
}

/// `E[k] = p (1 - p^D) / (1 - p)`
pub fn expected_k(p: f64, d: u32) -> Result<f64> {
    check_p_below_one(p)?;
    let d = check_depth(d)?;
    Ok(p * (1.0 - p.powi(d)) / (1.0 - p))
}

/// `Var[k] = (p - (2D+1) p^{D+1} + (2D+1) p^{D+2} - p^{2D+2}) / (1 - p)²`
pub fn variance_k(p: f64, d: u32) -> Result<f64> {
    check_p_below_one(p)?;
    let d = check_depth(d)?;
    let c = (2 * d + 1) as f64;
    let num = p - c * p.powi(d + 1) + c * p.powi(d + 2) - p.powi(2 * d + 2);
    Ok(num / (1.0 - p).powi(2))
}

/// `E[χ] = 1 - p^D`
pub fn mean_chi(p: f64, d: u32) -> Result<f64> {
    check_p_below_one(p)?;
    let d = check_depth(d)?;
    Ok(1.0 - p.powi(d))
}

/// `Var[χ] = p^D (1 - p^D)`
pub fn variance_chi(p: f64, d: u32) -> Result<f64> {
    check_p_below_one(p)?;
    let d = check_depth(d)?;
    let pd = p.powi(d);
    Ok(pd * (1.0 - pd))
}

/// `Cov[k, χ] = (-D p^D + (D+1) p^{D+1} - p^{2D+1}) / (1 - p)`
pub fn cov_k_chi(p: f64, d: u32) -> Result<f64> {
    check_p_below_one(p)?;
    let d = check_depth(d)?;
    let df = d as f64;
    let num = -df * p.powi(d) + (df + 1.0) * p.powi(d + 1) - p.powi(2 * d + 1);
    Ok(num / (1.0 - p))
}

/// Limiting variance of `√M (p̂ - p)`: `p (1 - p)² / (1 - p^D)`.
pub fn asymptotic_var_freq(p: f64, d: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("frequency {p} must lie in (0, 1)")));
    }
    let d = check_depth(d)?;
    Ok(p * (1.0 - p).powi(2) / (1.0 - p.powi(d)))
}

/// Limiting variance `τ²` of `√M (q̂ - q)` for `target`, given the true
/// per-class frequencies of the pattern and the class priors.
pub fn asymptotic_var_conf(
    class_freqs: &[f64],
    priors: &ClassPrior,
    target: ClassId,
    d: u32,
) -> Result<f64> {
    if class_freqs.len() != priors.len() || class_freqs.is_empty() {
        return Err(Error::param("need one frequency per class"));
    }
    let t = target.index();
    if t >= class_freqs.len() {
        return Err(Error::UnknownClass(target.0.to_string()));
    }
    // per-class limiting variance of √M p̂^(c)
    let v = class_freqs
        .iter()
        .map(|&p| asymptotic_var_freq(p, d))
        .collect::<Result<Vec<f64>>>()?;
    let marginal = marginal_support(class_freqs, priors);
    if marginal <= 0.0 {
        return Err(Error::ConfidenceUndefined);
    }
    let (pt, pri_t) = (class_freqs[t], priors.priors[t]);
    let ms2 = marginal * marginal;
    let spread: f64 = v
        .iter()
        .zip(&priors.priors)
        .map(|(vc, pc)| vc * pc * pc)
        .sum();
    let first = (pt * pri_t / ms2).powi(2) * spread;
    let second = (pri_t / ms2).powi(2) * v[t] * marginal * (marginal - 2.0 * pt * pri_t);
    Ok(first + second)
}
