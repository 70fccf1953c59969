//! Value types shared across the crate.
//!
//! Everything here is an immutable `Copy` value; sharing between threads
//! needs no synchronization.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Design {
    OneSample,
    TwoSample,
}

/// The sufficient summary of a t-test: the observed statistic, its degrees
/// of freedom and the effective sample size multiplying δ in the
/// noncentrality parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub t: f64,
    pub nu: f64,
    pub n_eff: f64,
    pub design: Design,
    pub n_total: u64,
}

impl SummaryStats {
    /// Builds a summary, checking the design invariants.
    pub fn new(t: f64, nu: f64, n_eff: f64, design: Design, n_total: u64) -> Result<Self> {
        if !t.is_finite() {
            return invalid(format!("t must be finite, got {t}"));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return invalid(format!("degrees of freedom must be positive, got {nu}"));
        }
        if !(n_eff > 0.0 && n_eff.is_finite()) {
            return invalid(format!("effective sample size must be positive, got {n_eff}"));
        }
        if n_total < 2 {
            return invalid(format!("total sample size must be at least 2, got {n_total}"));
        }
        let expected_nu = match design {
            Design::OneSample => n_total as f64 - 1.0,
            Design::TwoSample => n_total as f64 - 2.0,
        };
        if (nu - expected_nu).abs() > 1e-9 * expected_nu.max(1.0) {
            return invalid(format!(
                "{design:?} design with n_total = {n_total} requires nu = {expected_nu}, got {nu}"
            ));
        }
        if design == Design::OneSample && (n_eff - n_total as f64).abs() > 1e-9 * n_eff {
            return invalid(format!(
                "one-sample design requires n_eff = n_total = {n_total}, got {n_eff}"
            ));
        }
        Ok(Self {
            t,
            nu,
            n_eff,
            design,
            n_total,
        })
    }

    /// Two-sample summary from the observed t and the two group sizes.
    pub fn two_sample(t: f64, n1: u64, n2: u64) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return invalid(format!("group sizes must be at least 2, got {n1} and {n2}"));
        }
        let n_eff = (n1 * n2) as f64 / (n1 + n2) as f64;
        Self::new(
            t,
            (n1 + n2) as f64 - 2.0,
            n_eff,
            Design::TwoSample,
            n1 + n2,
        )
    }

    /// Same design, different observed statistic.
    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..*self }
    }
}

/// A data-governing parameter θ = (μ, σ) with its standardized effect size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub mu: f64,
    pub sigma: f64,
    pub delta: f64,
}

impl ParamPoint {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return invalid(format!("mu must be finite, got {mu}"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return invalid(format!("sigma must be positive, got {sigma}"));
        }
        Ok(Self {
            mu,
            sigma,
            delta: mu / sigma,
        })
    }
}

/// Which slice of the encompassing Cauchy a truncated prior keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalRegion {
    /// |δ| ≤ a
    Inside,
    /// |δ| > a
    Outside,
}

/// Prior on the standardized effect size δ. The nuisance σ always carries
/// the scale-invariant σ⁻¹ prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriorSpec {
    PointAtZero,
    PeriNullNormal {
        kappa0: f64,
    },
    AltCauchy {
        kappa1: f64,
    },
    TruncatedCauchy {
        kappa_e: f64,
        a: f64,
        region: IntervalRegion,
    },
    PeriPointMixture {
        xi: f64,
        kappa0: f64,
    },
    /// Normal peri-null with κ₀ = c/√n, resolved against the sample size.
    ShrinkingPeriNull {
        c: f64,
    },
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be positive and finite, got {v}"))
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PriorSpec::PointAtZero => Ok(()),
            PriorSpec::PeriNullNormal { kappa0 } => check_scale("kappa0", kappa0),
            PriorSpec::AltCauchy { kappa1 } => check_scale("kappa1", kappa1),
            PriorSpec::TruncatedCauchy { kappa_e, a, .. } => {
                check_scale("kappa_e", kappa_e)?;
                // a = +inf is accepted here; the engine reports it as a
                // degenerate prior.
                if a > 0.0 {
                    Ok(())
                } else {
                    invalid(format!("interval half-width a must be positive, got {a}"))
                }
            }
            PriorSpec::PeriPointMixture { xi, kappa0 } => {
                if !(xi > 0.0 && xi < 1.0) {
                    return invalid(format!("mixture weight xi must lie in (0, 1), got {xi}"));
                }
                check_scale("kappa0", kappa0)
            }
            PriorSpec::ShrinkingPeriNull { c } => check_scale("c", c),
        }
    }

    /// Replaces a shrinking peri-null by the normal peri-null it denotes at
    /// sample size `n_total`; other variants are returned unchanged.
    pub fn resolve(&self, n_total: u64) -> PriorSpec {
        match *self {
            PriorSpec::ShrinkingPeriNull { c } => PriorSpec::PeriNullNormal {
                kappa0: c / (n_total as f64).sqrt(),
            },
            other => other,
        }
    }
}

/// A Bayes factor of a numerator hypothesis over a denominator hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BFResult {
    pub log_bf: f64,
    pub bf: f64,
    /// log BF₁₀ part of the decomposition BF₁₀̃ = BF₁₀ · BF₀₀̃.
    pub point_null_log_bf: Option<f64>,
    /// log BF₀₀̃ part of the same decomposition.
    pub correction_log_bf: Option<f64>,
    pub posterior_prob_numerator: f64,
    pub prior_odds: f64,
    pub quad_error_bound: f64,
}

impl BFResult {
    pub fn new(log_bf: f64, quad_error_bound: f64) -> Self {
        let mut r = Self {
            log_bf,
            bf: log_bf.exp(),
            point_null_log_bf: None,
            correction_log_bf: None,
            posterior_prob_numerator: 0.5,
            prior_odds: 1.0,
            quad_error_bound,
        };
        r.posterior_prob_numerator = posterior_probability(log_bf, 1.0);
        r
    }

    pub fn with_decomposition(mut self, point_null_log_bf: f64, correction_log_bf: f64) -> Self {
        self.point_null_log_bf = Some(point_null_log_bf);
        self.correction_log_bf = Some(correction_log_bf);
        self
    }

    /// Recomputes the posterior probability of the numerator hypothesis
    /// under the given prior odds.
    pub fn with_prior_odds(mut self, prior_odds: f64) -> Result<Self> {
        if !(prior_odds > 0.0 && prior_odds.is_finite()) {
            return invalid(format!("prior odds must be positive, got {prior_odds}"));
        }
        self.prior_odds = prior_odds;
        self.posterior_prob_numerator = posterior_probability(self.log_bf, prior_odds);
        Ok(self)
    }
}

/// (odds·BF)/(1 + odds·BF), evaluated as a logistic in log space.
pub fn posterior_probability(log_bf: f64, prior_odds: f64) -> f64 {
    let z = log_bf + prior_odds.ln();
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
