//! Marginal likelihoods and Bayes factors for the one- and two-sample
//! t-test.
//!
//! Under the scale-invariant σ⁻¹ prior the data enter only through t, whose
//! prior-predictive density is
//!
//! ```text
//! p(t | H) = ∫ nct(t; ν, √n_eff · δ) π(δ | H) dδ.
//! ```
//!
//! Normal priors are integrated over a truncated window in δ with the
//! discarded prior mass charged to the error bound. Cauchy priors are
//! integrated after the substitution δ = κ·tan φ, which turns the prior into
//! a uniform density on a bounded interval and needs no truncation.
//!
//! All integrals are computed on a rescaled integrand and combined in log
//! space.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};
use crate::noncentral_t::logpdf_unchecked;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::special::{log_sum_exp, normal_logpdf};
use crate::types::{BFResult, IntervalRegion, PriorSpec, SummaryStats};

/// Accuracy of a single noncentral-t log density evaluation, charged to
/// every marginal's error bound.
const LOGPDF_ACCURACY: f64 = 1e-13;

/// A log prior-predictive density with an absolute error bound on the log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogMarginal {
    pub log_value: f64,
    pub error_bound: f64,
}

/// The t-likelihood as a function of δ.
#[derive(Debug, Clone, Copy)]
struct TLikelihood {
    t: f64,
    nu: f64,
    sqrt_n: f64,
}

impl TLikelihood {
    fn new(stats: &SummaryStats) -> Self {
        Self {
            t: stats.t,
            nu: stats.nu,
            sqrt_n: stats.n_eff.sqrt(),
        }
    }

    fn log_lik(&self, delta: f64) -> f64 {
        let ncp = self.sqrt_n * delta;
        if !ncp.is_finite() || ncp.abs() > 1e6 * self.t.abs().max(1.0) {
            // beyond this the density is below exp(-1e11)
            return f64::NEG_INFINITY;
        }
        logpdf_unchecked(self.t, self.nu, ncp)
    }

    /// Approximate location and width of the likelihood peak in δ.
    fn peak(&self) -> (f64, f64) {
        let centre = self.t / self.sqrt_n;
        let width = (1.0 + self.t * self.t / (2.0 * self.nu)).sqrt() / self.sqrt_n;
        (centre, width)
    }
}

/// ∫ exp(log_f) over a union of segments, each given by its sorted
/// breakpoints. The integrand is rescaled by its largest breakpoint value
/// and by `width` so the integral is of order one.
///
/// Returns the log integral and the relative error estimate.
fn integrate_log<F: Fn(f64) -> f64>(
    log_f: F,
    segments: &[Vec<f64>],
    width: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let peak = segments
        .iter()
        .flatten()
        .map(|&x| log_f(x))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::NonFinite(
            "integrand is zero at every breakpoint".into(),
        ));
    }
    let shift = peak + width.ln();
    let scaled = |x: f64| {
        let v = log_f(x) - shift;
        if v.is_nan() {
            0.0
        } else {
            v.exp()
        }
    };
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for pts in segments {
        let r = integrate(scaled, pts, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions);
        value += r.value;
        error += r.error;
        converged &= r.converged;
    }
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::NonFinite(format!(
            "rescaled marginal integral evaluated to {value}"
        )));
    }
    let log_value = shift + value.ln();
    let rel = error / value;
    if !converged {
        return Err(Error::Convergence {
            estimate: log_value,
            error_bound: rel,
        });
    }
    Ok((log_value, rel))
}

fn push_inside(pts: &mut Vec<f64>, x: f64, lo: f64, hi: f64) {
    if x.is_finite() && x > lo && x < hi {
        pts.push(x);
    }
}

fn sorted(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn finish(log_value: f64, rel_error: f64) -> LogMarginal {
    LogMarginal {
        log_value,
        // |log(I + e) − log I| ≤ e/I up to second order
        error_bound: rel_error + LOGPDF_ACCURACY + 4.0 * f64::EPSILON * log_value.abs(),
    }
}

/// Φ(x) for the normal prior's tail mass.
fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

fn normal_marginal(lik: &TLikelihood, kappa: f64, cfg: &QuadratureConfig) -> Result<LogMarginal> {
    let half = cfg.domain_halfwidth_sd;
    let (d_hat, w_lik) = lik.peak();
    let prec_lik = 1.0 / (w_lik * w_lik);
    let prec_prior = 1.0 / (kappa * kappa);
    let post = prec_lik * d_hat / (prec_lik + prec_prior);
    let w_post = (prec_lik + prec_prior).sqrt().recip();

    let lo = (-half * kappa).min(d_hat - half * w_lik);
    let hi = (half * kappa).max(d_hat + half * w_lik);
    let mut pts = vec![lo, hi];
    for x in [0.0, d_hat, -kappa, kappa] {
        push_inside(&mut pts, x, lo, hi);
    }
    for k in [0.0, 1.0, 3.0, 8.0] {
        push_inside(&mut pts, post - k * w_post, lo, hi);
        push_inside(&mut pts, post + k * w_post, lo, hi);
    }
    let log_f = |d: f64| normal_logpdf(d, kappa) + lik.log_lik(d);
    let (log_value, rel) = integrate_log(log_f, &[sorted(pts)], w_post, cfg)?;

    // The likelihood is log-concave in δ for ν ≥ 1 and its mode lies in the
    // window, so outside it stays below its value at the nearer edge.
    let outside_mass = normal_cdf(lo / kappa) + normal_cdf(-hi / kappa);
    let log_tail = outside_mass.ln() + lik.log_lik(lo).max(lik.log_lik(hi));
    let tail_rel = (log_tail - log_value).exp();
    Ok(finish(log_value, rel + tail_rel))
}

/// ∫ L(κ tan φ) dφ over the given φ-segments (each inside [−π/2, π/2]).
fn cauchy_phi_integral(
    lik: &TLikelihood,
    kappa: f64,
    segments: &[(f64, f64)],
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let (d_hat, w_lik) = lik.peak();
    let to_phi = |d: f64| (d / kappa).atan();
    let mut marks = vec![0.0, to_phi(d_hat)];
    for k in [1.0, 3.0, 8.0, 20.0] {
        marks.push(to_phi(d_hat - k * w_lik));
        marks.push(to_phi(d_hat + k * w_lik));
    }
    let width = (0.5 * (to_phi(d_hat + w_lik) - to_phi(d_hat - w_lik))).clamp(1e-300, 1.0);

    let pts: Vec<Vec<f64>> = segments
        .iter()
        .map(|&(a, b)| {
            let mut p = vec![a, b];
            for &m in &marks {
                push_inside(&mut p, m, a, b);
            }
            sorted(p)
        })
        .collect();
    integrate_log(|phi| lik.log_lik(kappa * phi.tan()), &pts, width, cfg)
}

/// Prior mass of a central Cauchy(0, κ) inside [−a, a] and outside it,
/// computed without cancellation.
fn cauchy_interval_masses(kappa: f64, a: f64) -> (f64, f64) {
    let inside = 2.0 * (a / kappa).atan() / PI;
    let outside = 2.0 * (kappa / a).atan() / PI;
    (inside, outside)
}

fn truncated_cauchy_marginal(
    lik: &TLikelihood,
    kappa: f64,
    a: f64,
    region: IntervalRegion,
    cfg: &QuadratureConfig,
) -> Result<LogMarginal> {
    let (mass_in, mass_out) = cauchy_interval_masses(kappa, a);
    let phi_a = (a / kappa).atan();
    let (segments, mass) = match region {
        IntervalRegion::Inside => (vec![(-phi_a, phi_a)], mass_in),
        IntervalRegion::Outside => (vec![(-FRAC_PI_2, -phi_a), (phi_a, FRAC_PI_2)], mass_out),
    };
    if !(mass >= f64::MIN_POSITIVE) || segments.iter().any(|&(lo, hi)| lo >= hi) {
        return Err(Error::DegeneratePrior(format!(
            "the {region:?} slice of Cauchy(0, {kappa}) at a = {a} has no representable mass"
        )));
    }
    let (log_int, rel) = cauchy_phi_integral(lik, kappa, &segments, cfg)?;
    // uniform density (1/π)/mass on the φ-segments
    Ok(finish(log_int - PI.ln() - mass.ln(), rel))
}

/// Log prior-predictive density of the observed t under `prior`, with an
/// absolute error bound on the log.
pub fn marginal_loglik(
    stats: &SummaryStats,
    prior: &PriorSpec,
    cfg: &QuadratureConfig,
) -> Result<LogMarginal> {
    prior.validate()?;
    cfg.validate()?;
    let lik = TLikelihood::new(stats);
    match prior.resolve(stats.n_total) {
        PriorSpec::PointAtZero => Ok(LogMarginal {
            log_value: lik.log_lik(0.0),
            error_bound: LOGPDF_ACCURACY,
        }),
        PriorSpec::PeriNullNormal { kappa0 } => normal_marginal(&lik, kappa0, cfg),
        PriorSpec::AltCauchy { kappa1 } => {
            let (log_int, rel) =
                cauchy_phi_integral(&lik, kappa1, &[(-FRAC_PI_2, FRAC_PI_2)], cfg)?;
            Ok(finish(log_int - PI.ln(), rel))
        }
        PriorSpec::TruncatedCauchy { kappa_e, a, region } => {
            truncated_cauchy_marginal(&lik, kappa_e, a, region, cfg)
        }
        PriorSpec::PeriPointMixture { xi, kappa0 } => {
            let point = lik.log_lik(0.0);
            let peri = normal_marginal(&lik, kappa0, cfg)?;
            Ok(LogMarginal {
                log_value: log_sum_exp(xi.ln() + point, (-xi).ln_1p() + peri.log_value),
                error_bound: peri.error_bound.max(LOGPDF_ACCURACY),
            })
        }
        PriorSpec::ShrinkingPeriNull { .. } => unreachable!("resolved above"),
    }
}

fn ratio(num: LogMarginal, den: LogMarginal) -> BFResult {
    BFResult::new(num.log_value - den.log_value, num.error_bound + den.error_bound)
}

/// BF₁₀: Cauchy(0, κ₁) alternative against the point null δ = 0.
pub fn point_null_bf10(
    stats: &SummaryStats,
    kappa1: f64,
    cfg: &QuadratureConfig,
) -> Result<BFResult> {
    let alt = marginal_loglik(stats, &PriorSpec::AltCauchy { kappa1 }, cfg)?;
    let null = marginal_loglik(stats, &PriorSpec::PointAtZero, cfg)?;
    Ok(ratio(alt, null))
}

/// BF₀₀̃: point null against the N(0, κ₀²) peri-null.
pub fn peri_null_correction_bf(
    stats: &SummaryStats,
    kappa0: f64,
    cfg: &QuadratureConfig,
) -> Result<BFResult> {
    let null = marginal_loglik(stats, &PriorSpec::PointAtZero, cfg)?;
    let peri = marginal_loglik(stats, &PriorSpec::PeriNullNormal { kappa0 }, cfg)?;
    Ok(ratio(null, peri))
}

/// BF₁₀̃: Cauchy(0, κ₁) alternative against the N(0, κ₀²) peri-null.
///
/// `log_bf` is the direct ratio of marginals; the point-null Bayes factor
/// and the correction factor are stored alongside it.
pub fn peri_null_bf(
    stats: &SummaryStats,
    kappa0: f64,
    kappa1: f64,
    cfg: &QuadratureConfig,
) -> Result<BFResult> {
    let alt = marginal_loglik(stats, &PriorSpec::AltCauchy { kappa1 }, cfg)?;
    let null = marginal_loglik(stats, &PriorSpec::PointAtZero, cfg)?;
    let peri = marginal_loglik(stats, &PriorSpec::PeriNullNormal { kappa0 }, cfg)?;
    let mut r = BFResult::new(
        alt.log_value - peri.log_value,
        alt.error_bound + null.error_bound + peri.error_bound,
    );
    r = r.with_decomposition(
        alt.log_value - null.log_value,
        null.log_value - peri.log_value,
    );
    Ok(r)
}

/// Interval-null Bayes factor: the Cauchy(0, κₑ) prior restricted to
/// |δ| > a against the same prior restricted to |δ| ≤ a.
pub fn interval_null_bf(
    stats: &SummaryStats,
    kappa_e: f64,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<BFResult> {
    let outside = PriorSpec::TruncatedCauchy {
        kappa_e,
        a,
        region: IntervalRegion::Outside,
    };
    let inside = PriorSpec::TruncatedCauchy {
        kappa_e,
        a,
        region: IntervalRegion::Inside,
    };
    let out = marginal_loglik(stats, &outside, cfg)?;
    let ins = marginal_loglik(stats, &inside, cfg)?;
    Ok(ratio(out, ins))
}

/// Cauchy alternative against the mixture null ξ·δ₀ + (1 − ξ)·N(0, κ₀²).
pub fn peri_point_bf(
    stats: &SummaryStats,
    xi: f64,
    kappa0: f64,
    kappa1: f64,
    cfg: &QuadratureConfig,
) -> Result<BFResult> {
    if !(xi > 0.0 && xi < 1.0) {
        return invalid(format!("mixture weight xi must lie in (0, 1), got {xi}"));
    }
    let alt = marginal_loglik(stats, &PriorSpec::AltCauchy { kappa1 }, cfg)?;
    let mix = marginal_loglik(stats, &PriorSpec::PeriPointMixture { xi, kappa0 }, cfg)?;
    Ok(ratio(alt, mix))
}

/// Peri-null Bayes factor with κ₀ = c/√n_total.
pub fn shrinking_peri_null_bf(
    stats: &SummaryStats,
    c: f64,
    kappa1: f64,
    cfg: &QuadratureConfig,
) -> Result<BFResult> {
    PriorSpec::ShrinkingPeriNull { c }.validate()?;
    peri_null_bf(stats, c / (stats.n_total as f64).sqrt(), kappa1, cfg)
}

/// Prior mass of Cauchy(0, κ) on |δ| ≤ a and on |δ| > a.
pub fn interval_prior_masses(kappa: f64, a: f64) -> (f64, f64) {
    cauchy_interval_masses(kappa, a)
}
