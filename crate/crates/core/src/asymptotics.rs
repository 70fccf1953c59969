//! Large-sample behaviour of the peri-null t-test Bayes factor.
//!
//! Everything here depends on θ = (μ, σ) only through δ = μ/σ. The
//! information matrix of the normal model in (μ, σ) coordinates is taken as
//! I(θ) = diag(1/σ², 2/σ²).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::types::ParamPoint;

fn check(mu: f64, sigma: f64, kappa0: f64, kappa1: f64) -> Result<()> {
    if !mu.is_finite() {
        return invalid(format!("mu must be finite, got {mu}"));
    }
    for (name, v) in [("sigma", sigma), ("kappa0", kappa0), ("kappa1", kappa1)] {
        if !(v > 0.0 && v.is_finite()) {
            return invalid(format!("{name} must be positive and finite, got {v}"));
        }
    }
    Ok(())
}

/// g(δ) = v − const and its first two derivatives in δ.
fn g_derivs(delta: f64, kappa0: f64, kappa1: f64) -> (f64, f64) {
    let k0s = kappa0 * kappa0;
    let k1s = kappa1 * kappa1;
    let d2 = delta * delta;
    let g1 = delta / k0s - 2.0 * delta / (k1s + d2);
    let g2 = 1.0 / k0s - 2.0 * (k1s - d2) / ((k1s + d2) * (k1s + d2));
    (g1, g2)
}

/// The in-probability limit v(θ) of the log peri-null Bayes factor, i.e.
/// log π(θ|H₁) − log π(θ|H₀̃).
pub fn limit_log_bf(mu: f64, sigma: f64, kappa0: f64, kappa1: f64) -> Result<f64> {
    check(mu, sigma, kappa0, kappa1)?;
    let delta = mu / sigma;
    let r = delta / kappa1;
    Ok(0.5 * 2f64.ln() + kappa0.ln() + delta * delta / (2.0 * kappa0 * kappa0)
        - 0.5 * PI.ln()
        - kappa1.ln()
        - (r * r).ln_1p())
}

/// Gradient and Hessian of v with respect to (μ, σ).
pub fn limit_gradient_hessian(
    mu: f64,
    sigma: f64,
    kappa0: f64,
    kappa1: f64,
) -> Result<([f64; 2], [[f64; 2]; 2])> {
    check(mu, sigma, kappa0, kappa1)?;
    let delta = mu / sigma;
    let (g1, g2) = g_derivs(delta, kappa0, kappa1);
    let s2 = sigma * sigma;
    let grad = [g1 / sigma, -g1 * delta / sigma];
    let mu_sigma = -(delta * g2 + g1) / s2;
    let hess = [
        [g2 / s2, mu_sigma],
        [mu_sigma, (g2 * delta * delta + 2.0 * g1 * delta) / s2],
    ];
    Ok((grad, hess))
}

/// Variance of the first-order normal approximation at sample size n.
pub fn asymptotic_variance(mu: f64, sigma: f64, kappa0: f64, kappa1: f64, n: u64) -> Result<f64> {
    check(mu, sigma, kappa0, kappa1)?;
    if n == 0 {
        return invalid("n must be positive");
    }
    let (m2, s2) = (mu * mu, sigma * sigma);
    let (k0s, k1s) = (kappa0 * kappa0, kappa1 * kappa1);
    let a = m2 + (k1s - 2.0 * k0s) * s2;
    let b = m2 + k1s * s2;
    Ok((m2 * m2 + 2.0 * m2 * s2) * a * a / (2.0 * k0s * k0s * s2 * s2 * b * b * n as f64))
}

/// Closed-form Laplace correction constants of both t-test hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CConstants {
    pub c1_alt: f64,
    pub c2_alt: f64,
    pub c1_peri: f64,
    pub c2_peri: f64,
}

/// The closed-form constants.
///
/// The first-order peri-null constant agrees with the general expansion
/// engine; the second-order ones do not (see `laplace::models`).
pub fn c_constants(mu: f64, sigma: f64, kappa0: f64, kappa1: f64) -> Result<CConstants> {
    check(mu, sigma, kappa0, kappa1)?;
    let (m2, s2) = (mu * mu, sigma * sigma);
    let (m4, m6) = (m2 * m2, m2 * m2 * m2);
    let (s4, s6) = (s2 * s2, s2 * s2 * s2);
    let (k0s, k1s) = (kappa0 * kappa0, kappa1 * kappa1);
    let b = m2 + k1s * s2;

    let c1_alt = (13.0 * m4 + (18.0 + 2.0 * k1s) * s2 * m2 + (k1s - 6.0) * k1s * s4) / (6.0 * b * b);
    let c2_alt = (780.0 * m6
        + (1110.0 + 3127.0 * k1s) * s2 * m4
        + (6020.0 + 4462.0 * k1s) * k1s * s4 * m2
        + (5091.0 * k1s - 1426.0) * k1s * k1s * s6)
        / (-96.0 * b * b * b);
    let c1_peri = (3.0 * m4 + 6.0 * s2 * m2 + k0s * s4 * (2.0 * k0s - 6.0)) / (12.0 * k0s * k0s * s4);
    let c2_peri = (124.0 * m6
        + (264.0 - 2369.0 * k0s) * s2 * m4
        + (10811.0 * k0s - 2218.0) * k0s * s4 * m2
        + 2.0 * (713.0 - 5091.0 * k0s) * k0s * k0s * s6)
        / (192.0 * k0s * k0s * k0s * s6);
    Ok(CConstants {
        c1_alt,
        c2_alt,
        c1_peri,
        c2_peri,
    })
}

/// The same four constants computed by the general expansion engine from
/// exact derivatives of the t-test models at θ̂ = θ.
pub fn engine_c_constants(mu: f64, sigma: f64, kappa0: f64, kappa1: f64) -> Result<CConstants> {
    use crate::laplace::models::{expand_model, DerivativeSource, EffectPrior, TTestModel};
    check(mu, sigma, kappa0, kappa1)?;
    // the coefficients do not depend on n
    let peri = TTestModel::at_mle(100, mu, sigma, EffectPrior::Normal { kappa: kappa0 })?;
    let alt = TTestModel::at_mle(100, mu, sigma, EffectPrior::Cauchy { kappa: kappa1 })?;
    let p = expand_model(&peri, DerivativeSource::Analytic)?;
    let a = expand_model(&alt, DerivativeSource::Analytic)?;
    Ok(CConstants {
        c1_alt: a.c1,
        c2_alt: a.c2,
        c1_peri: p.c1,
        c2_peri: p.c2,
    })
}

/// Which Laplace bracket is nonpositive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailedBracket {
    Alternative,
    PeriNull,
    Both,
}

/// E(θ, n), or the reason it is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum BiasTerm {
    Valid {
        value: f64,
    },
    Invalid {
        failed: FailedBracket,
        alt_bracket: f64,
        peri_bracket: f64,
        /// Smallest n from which both brackets stay positive.
        min_valid_n: u64,
    },
}

impl BiasTerm {
    pub fn value(&self) -> Option<f64> {
        match *self {
            BiasTerm::Valid { value } => Some(value),
            BiasTerm::Invalid { .. } => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, BiasTerm::Valid { .. })
    }
}

fn bracket(c1: f64, c2: f64, n: f64) -> f64 {
    1.0 + c1 / n + c2 / (n * n)
}

/// Smallest integer n₀ ≥ 1 with n² + c1·n + c2 > 0 for every n ≥ n₀.
fn bracket_threshold(c1: f64, c2: f64) -> u64 {
    let disc = c1 * c1 - 4.0 * c2;
    if disc < 0.0 {
        return 1;
    }
    let root = (-c1 + disc.sqrt()) / 2.0;
    let mut n0 = if root < 1.0 { 1 } else { root.floor() as u64 + 1 };
    // guard the boundary against rounding in the root
    while n0 > 1 && bracket(c1, c2, (n0 - 1) as f64) > 0.0 && (n0 - 1) as f64 > root - 1e-9 {
        n0 -= 1;
    }
    while bracket(c1, c2, n0 as f64) <= 0.0 {
        n0 += 1;
    }
    n0
}

/// Smallest n from which the bias term is defined for all larger n.
pub fn bias_min_valid_n(c: &CConstants) -> u64 {
    bracket_threshold(c.c1_alt, c.c2_alt).max(bracket_threshold(c.c1_peri, c.c2_peri))
}

/// E(θ, n) from given constants.
pub fn bias_from_constants(c: &CConstants, n: u64) -> Result<BiasTerm> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let nf = n as f64;
    let alt = bracket(c.c1_alt, c.c2_alt, nf);
    let peri = bracket(c.c1_peri, c.c2_peri, nf);
    let failed = match (alt > 0.0, peri > 0.0) {
        (true, true) => return Ok(BiasTerm::Valid { value: alt.ln() - peri.ln() }),
        (false, true) => FailedBracket::Alternative,
        (true, false) => FailedBracket::PeriNull,
        (false, false) => FailedBracket::Both,
    };
    Ok(BiasTerm::Invalid {
        failed,
        alt_bracket: alt,
        peri_bracket: peri,
        min_valid_n: bias_min_valid_n(c),
    })
}

/// The bias term E(θ, n) from the closed-form constants.
pub fn bias_term(mu: f64, sigma: f64, kappa0: f64, kappa1: f64, n: u64) -> Result<BiasTerm> {
    bias_from_constants(&c_constants(mu, sigma, kappa0, kappa1)?, n)
}

/// Approximate sampling distribution of the log peri-null Bayes factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplingDistribution {
    /// log BF ≈ N(mean, sd²).
    Normal { mean: f64, sd: f64 },
    /// log BF ≈ shift + scale·Z², Z ~ N(0, 1).
    ShiftedChiSquare { shift: f64, scale: f64 },
    /// The bias term is undefined at this n.
    Unusable { min_valid_n: u64 },
}

fn std_normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

impl SamplingDistribution {
    pub fn is_usable(&self) -> bool {
        !matches!(self, SamplingDistribution::Unusable { .. })
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            SamplingDistribution::Normal { mean, .. } => Some(mean),
            SamplingDistribution::ShiftedChiSquare { shift, scale } => Some(shift + scale),
            SamplingDistribution::Unusable { .. } => None,
        }
    }

    /// The p-quantile, 0 < p < 1.
    pub fn quantile(&self, p: f64) -> Result<Option<f64>> {
        if !(p > 0.0 && p < 1.0) {
            return invalid(format!("quantile level must be in (0, 1), got {p}"));
        }
        Ok(match *self {
            SamplingDistribution::Normal { mean, sd } => Some(mean + sd * std_normal_quantile(p)),
            SamplingDistribution::ShiftedChiSquare { shift, scale } => {
                // a negative scale reverses the order of the χ² quantiles
                let q = if scale >= 0.0 { p } else { 1.0 - p };
                let z = std_normal_quantile(0.5 + q / 2.0);
                Some(shift + scale * z * z)
            }
            SamplingDistribution::Unusable { .. } => None,
        })
    }
}

/// Which limiting law governs the log Bayes factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    FirstOrderNormal,
    SecondOrderChiSquare,
}

/// Gradient norm below which the first-order term is treated as absent.
pub const REGIME_GRADIENT_TOL: f64 = 1e-12;

/// Coefficient of Z² in the second-order law, before division by n.
pub fn chi_square_coefficient(kappa0: f64, kappa1: f64) -> f64 {
    let (k0s, k1s) = (kappa0 * kappa0, kappa1 * kappa1);
    (k1s - 2.0 * k0s) / (2.0 * k0s * k1s)
}

/// Normal law when v̇ ≠ 0, shifted χ²(1) when v̇ = 0 (μ = 0).
pub fn sampling_distribution(
    mu: f64,
    sigma: f64,
    kappa0: f64,
    kappa1: f64,
    n: u64,
) -> Result<SamplingDistribution> {
    Ok(summarize(ParamPoint::new(mu, sigma)?, kappa0, kappa1, n)?.distribution)
}

/// All asymptotic quantities at one parameter point and sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSummary {
    pub theta: ParamPoint,
    pub kappa0: f64,
    pub kappa1: f64,
    pub n: u64,
    pub limit_log_bf: f64,
    pub grad: [f64; 2],
    pub hessian: [[f64; 2]; 2],
    pub hessian_mu_mu: f64,
    /// n times the asymptotic variance.
    pub variance_over_n: f64,
    pub constants: CConstants,
    pub bias: BiasTerm,
    pub regime: Regime,
    pub distribution: SamplingDistribution,
}

pub fn summarize(theta: ParamPoint, kappa0: f64, kappa1: f64, n: u64) -> Result<AsymptoticSummary> {
    let (mu, sigma) = (theta.mu, theta.sigma);
    let v = limit_log_bf(mu, sigma, kappa0, kappa1)?;
    let (grad, hessian) = limit_gradient_hessian(mu, sigma, kappa0, kappa1)?;
    let variance = asymptotic_variance(mu, sigma, kappa0, kappa1, n)?;
    let constants = c_constants(mu, sigma, kappa0, kappa1)?;
    let bias = bias_from_constants(&constants, n)?;
    let regime = if grad[0].hypot(grad[1]) < REGIME_GRADIENT_TOL {
        Regime::SecondOrderChiSquare
    } else {
        Regime::FirstOrderNormal
    };
    let distribution = match (bias, regime) {
        (BiasTerm::Invalid { min_valid_n, .. }, _) => SamplingDistribution::Unusable { min_valid_n },
        (BiasTerm::Valid { value }, Regime::FirstOrderNormal) => SamplingDistribution::Normal {
            mean: v + value,
            sd: variance.sqrt(),
        },
        (BiasTerm::Valid { value }, Regime::SecondOrderChiSquare) => {
            SamplingDistribution::ShiftedChiSquare {
                shift: v + value,
                scale: chi_square_coefficient(kappa0, kappa1) / n as f64,
            }
        }
    };
    Ok(AsymptoticSummary {
        theta,
        kappa0,
        kappa1,
        n,
        limit_log_bf: v,
        grad,
        hessian,
        hessian_mu_mu: hessian[0][0],
        variance_over_n: variance * n as f64,
        constants,
        bias,
        regime,
        distribution,
    })
}
