//! Gaussian helpers and closed-form expansion evaluators.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::divergence::{relative_entropy, relative_entropy_variance};
use crate::error::{Error, Result};
use crate::operator::{fidelity, DensityOperator, HermitianOperator};

/// Variances below this are treated as zero.
pub const MIN_VARIANCE: f64 = 1e-12;

pub const REMAINDER_NOTE: &str = "O(log n / n) remainder omitted";

/// Standard normal CDF.
pub fn gaussian_cdf(a: f64) -> f64 {
    0.5 * erfc(-a / std::f64::consts::SQRT_2)
}

fn gaussian_pdf(a: f64) -> f64 {
    (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse standard normal CDF on `(0, 1)`.
pub fn gaussian_quantile(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!(
            "quantile argument {eps} outside (0, 1)"
        )));
    }
    if eps > 0.5 {
        return Ok(-gaussian_quantile(1.0 - eps)?);
    }
    let (mut lo, mut hi) = (-40.0f64, 0.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gaussian_cdf(mid) < eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let pdf = gaussian_pdf(x);
    if pdf > 0.0 {
        x -= (gaussian_cdf(x) - eps) / pdf;
    }
    Ok(x)
}

/// `f(ε, δ) = [√ε √(ε+δ) + √(1−ε−δ) √(1−ε)]²`.
pub fn f_eps_delta(eps: f64, delta: f64) -> Result<f64> {
    const SLACK: f64 = 1e-15;
    if !(0.0..=1.0).contains(&eps) || delta < 0.0 || eps + delta > 1.0 + SLACK {
        return Err(Error::Domain(format!(
            "f(eps, delta) needs eps in [0,1] and delta in [0, 1-eps], got ({eps}, {delta})"
        )));
    }
    let rest = (1.0 - eps - delta).max(0.0);
    let root = eps.sqrt() * (eps + delta).sqrt() + rest.sqrt() * (1.0 - eps).sqrt();
    Ok((root * root).min(1.0))
}

/// Smoothing parameter `[√ε₁ √(1−ε₂) + √(1−ε₁) √ε₂]²` that links a
/// smooth max-divergence at `ε₁` to the smooth F-min-divergence at `ε₂`.
pub fn linked_smoothing(eps1: f64, eps2: f64) -> Result<f64> {
    for e in [eps1, eps2] {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::Domain(format!(
                "smoothing parameter {e} outside [0, 1]"
            )));
        }
    }
    let root = eps1.sqrt() * (1.0 - eps2).sqrt() + (1.0 - eps1).sqrt() * eps2.sqrt();
    Ok((root * root).min(1.0))
}

/// `−log2[1 − g(ε,ρ,σ)] − log2 Tr σ` with
/// `g = (√ε √F(ρ,σ̂) + √(1−F(ρ,σ̂)) √(1−ε))²`, `σ̂ = σ / Tr σ`.
pub fn g_bound(eps: f64, rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let tr = sigma.trace();
    if !(tr > 0.0) {
        return Err(Error::Domain("sigma has zero trace".into()));
    }
    let mut f = fidelity(rho, &sigma.scale(1.0 / tr))?.min(1.0);
    // spectral fidelity is accurate to ~1e-12 and √(1−F) would amplify the noise
    if 1.0 - f < 1e-12 {
        f = 1.0;
    }
    if !(0.0..=1.0).contains(&eps) || eps > f {
        return Err(Error::Domain(format!(
            "epsilon {eps} exceeds F(rho, sigma_hat) = {f}"
        )));
    }
    let root = eps.sqrt() * f.sqrt() + (1.0 - f).sqrt() * (1.0 - eps).sqrt();
    let g = root * root;
    Ok(-(1.0 - g).log2() - tr.log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "alpha")]
pub enum ExpansionTarget {
    /// Smooth F-min-relative entropy.
    Dminf,
    /// Hypothesis-testing relative entropy.
    Hypothesis,
    /// Smooth sandwiched Rényi relative entropy of order α ≥ 1/2, α ≠ 1.
    Sandwiched(f64),
}

impl ExpansionTarget {
    fn quantile_sign(&self) -> Result<f64> {
        match *self {
            ExpansionTarget::Dminf | ExpansionTarget::Hypothesis => Ok(1.0),
            ExpansionTarget::Sandwiched(a) if (0.5..1.0).contains(&a) => Ok(1.0),
            ExpansionTarget::Sandwiched(a) if a > 1.0 && a.is_finite() => Ok(-1.0),
            ExpansionTarget::Sandwiched(a) => Err(Error::BadAlpha(a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerms {
    pub first_order: f64,
    /// `±√V · Φ⁻¹(ε)`.
    pub second_order_coeff: f64,
    pub n: u64,
    /// `first_order + second_order_coeff / √n`.
    pub value_per_copy: f64,
    pub remainder_note: String,
}

/// Relative entropy and its variance with the checks every expansion needs.
pub fn moments(rho: &DensityOperator, sigma: &HermitianOperator) -> Result<(f64, f64)> {
    let d = relative_entropy(rho, sigma)?;
    if !d.support_condition_met {
        return Err(Error::SupportViolation);
    }
    let v = relative_entropy_variance(rho, sigma)?.bits;
    Ok((d.bits, v))
}

/// Two-term expansion from precomputed moments.
pub fn expansion_from_moments(
    d: f64,
    v: f64,
    eps: f64,
    n: u64,
    target: ExpansionTarget,
) -> Result<ExpansionTerms> {
    let sign = target.quantile_sign()?;
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if v < MIN_VARIANCE {
        return Err(Error::ZeroVariance(v));
    }
    let coeff = sign * v.sqrt() * gaussian_quantile(eps)?;
    Ok(ExpansionTerms {
        first_order: d,
        second_order_coeff: coeff,
        n,
        value_per_copy: d + coeff / (n as f64).sqrt(),
        remainder_note: REMAINDER_NOTE.to_string(),
    })
}

/// `D(ρ‖σ) ± √(V(ρ‖σ)/n) Φ⁻¹(ε)` per copy.
pub fn second_order(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps: f64,
    n: u64,
    target: ExpansionTarget,
) -> Result<ExpansionTerms> {
    target.quantile_sign()?;
    let (d, v) = moments(rho, sigma)?;
    expansion_from_moments(d, v, eps, n, target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationDirection {
    Dminf,
    SandwichedGt1,
    SandwichedLt1,
}

/// `D(ρ‖σ) ∓ √(2V) a_n` per copy, for error `ε_n = e^{−n a_n²}`.
pub fn moderate_deviation(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    a_n: f64,
    n: u64,
    direction: DeviationDirection,
) -> Result<f64> {
    if !(a_n >= 0.0) || !a_n.is_finite() {
        return Err(Error::Domain(format!("a_n = {a_n} must be nonnegative")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let (d, v) = moments(rho, sigma)?;
    let sign = match direction {
        DeviationDirection::Dminf | DeviationDirection::SandwichedLt1 => -1.0,
        DeviationDirection::SandwichedGt1 => 1.0,
    };
    Ok(d + sign * (2.0 * v.max(0.0)).sqrt() * a_n)
}

/// Error level `e^{−n a_n²}` of a moderate sequence.
pub fn moderate_error(a_n: f64, n: u64) -> f64 {
    (-(n as f64) * a_n * a_n).exp()
}
