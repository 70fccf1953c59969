//! Test models with exactly known marginal likelihoods.
//!
//! Each model describes h(θ) = −(1/n) log f(yⁿ|θ) and the prior density as
//! functions of truncated Taylor variables, so the same code yields values
//! and exact derivative tensors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::expansion::{laplace_marginal, DerivativeOracle, LaplaceMarginal};
use super::finite_diff::FiniteDifferenceOracle;
use super::taylor::Taylor;
use super::tensor::SymTensor;
use crate::error::{invalid, Result};
use crate::quadrature::integrate;
use crate::special::{ln_gamma, normal_logpdf};

/// Derivative oracle for a function written over Taylor variables.
pub struct TaylorOracle<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[Taylor]) -> Taylor> TaylorOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }

    /// Plain function value.
    pub fn eval(&self, point: &[f64]) -> f64 {
        (self.f)(&Taylor::variables(point, 0)).value()
    }
}

impl<F: Fn(&[Taylor]) -> Taylor> DerivativeOracle for TaylorOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn derivatives(&self, point: &[f64], max_order: usize) -> Result<Vec<SymTensor>> {
        Ok((self.f)(&Taylor::variables(point, max_order)).derivative_tensors())
    }
}

/// A model whose Laplace expansion can be checked against its exact
/// marginal likelihood.
pub trait LaplaceModel {
    fn dim(&self) -> usize;
    fn n(&self) -> u64;
    fn mle(&self) -> Vec<f64>;
    /// h(θ) = −(1/n) log f(yⁿ|θ).
    fn h(&self, theta: &[Taylor]) -> Taylor;
    /// Prior density π(θ).
    fn prior(&self, theta: &[Taylor]) -> Taylor;
    /// log ∫ f(yⁿ|θ) π(θ) dθ.
    fn exact_log_marginal(&self) -> Result<f64>;
}

/// Where derivative tensors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference,
}

/// Runs the expansion on a model.
pub fn expand_model(model: &dyn LaplaceModel, source: DerivativeSource) -> Result<LaplaceMarginal> {
    let h = TaylorOracle::new(model.dim(), |t: &[Taylor]| model.h(t));
    let p = TaylorOracle::new(model.dim(), |t: &[Taylor]| model.prior(t));
    match source {
        DerivativeSource::Analytic => laplace_marginal(&h, &p, &model.mle(), model.n()),
        DerivativeSource::FiniteDifference => {
            let hf = FiniteDifferenceOracle::new(model.dim(), |x: &[f64]| h.eval(x));
            let pf = FiniteDifferenceOracle::new(model.dim(), |x: &[f64]| p.eval(x));
            laplace_marginal(&hf, &pf, &model.mle(), model.n())
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return invalid(format!("sample size must be at least 2, got {n}"));
    }
    Ok(())
}

fn half_ln_2pi() -> f64 {
    0.5 * (2.0 * PI).ln()
}

/// yᵢ ~ N(θ, σ²) with σ known and θ ~ N(m₀, τ²); the data enter through the
/// sample mean and the mean squared deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateGaussian {
    pub n: u64,
    pub mean: f64,
    pub mean_sq_dev: f64,
    pub sigma: f64,
    pub prior_mean: f64,
    pub prior_sd: f64,
}

impl ConjugateGaussian {
    pub fn new(n: u64, mean: f64, mean_sq_dev: f64, sigma: f64, prior_mean: f64, prior_sd: f64) -> Result<Self> {
        check_n(n)?;
        if !(sigma > 0.0 && prior_sd > 0.0 && mean_sq_dev >= 0.0) {
            return invalid("scales must be positive");
        }
        Ok(Self {
            n,
            mean,
            mean_sq_dev,
            sigma,
            prior_mean,
            prior_sd,
        })
    }
}

impl LaplaceModel for ConjugateGaussian {
    fn dim(&self) -> usize {
        1
    }
    fn n(&self) -> u64 {
        self.n
    }
    fn mle(&self) -> Vec<f64> {
        vec![self.mean]
    }
    fn h(&self, t: &[Taylor]) -> Taylor {
        let r = t[0].add_const(-self.mean);
        r.square()
            .add_const(self.mean_sq_dev)
            .scale(0.5 / (self.sigma * self.sigma))
            .add_const(half_ln_2pi() + self.sigma.ln())
    }
    fn prior(&self, t: &[Taylor]) -> Taylor {
        let z = t[0].add_const(-self.prior_mean).scale(1.0 / self.prior_sd);
        z.square()
            .scale(-0.5)
            .exp()
            .scale(1.0 / (self.prior_sd * (2.0 * PI).sqrt()))
    }
    fn exact_log_marginal(&self) -> Result<f64> {
        let n = self.n as f64;
        let s2 = self.sigma * self.sigma;
        let predictive_sd = (self.prior_sd * self.prior_sd + s2 / n).sqrt();
        Ok(-0.5 * n * (2.0 * PI * s2).ln() - n * self.mean_sq_dev / (2.0 * s2)
            + 0.5 * (2.0 * PI * s2 / n).ln()
            + normal_logpdf(self.mean - self.prior_mean, predictive_sd))
    }
}

/// k successes in n Bernoulli trials with a Beta(a, b) prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBernoulli {
    pub n: u64,
    pub k: u64,
    pub a: f64,
    pub b: f64,
}

impl BetaBernoulli {
    pub fn new(n: u64, k: u64, a: f64, b: f64) -> Result<Self> {
        check_n(n)?;
        if k == 0 || k >= n {
            return invalid("the MLE must be interior: need 0 < k < n");
        }
        if !(a > 0.0 && b > 0.0) {
            return invalid("beta parameters must be positive");
        }
        Ok(Self { n, k, a, b })
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

impl LaplaceModel for BetaBernoulli {
    fn dim(&self) -> usize {
        1
    }
    fn n(&self) -> u64 {
        self.n
    }
    fn mle(&self) -> Vec<f64> {
        vec![self.k as f64 / self.n as f64]
    }
    fn h(&self, t: &[Taylor]) -> Taylor {
        let p = self.k as f64 / self.n as f64;
        let one_minus = t[0].scale(-1.0).add_const(1.0);
        &t[0].ln().scale(-p) + &one_minus.ln().scale(p - 1.0)
    }
    fn prior(&self, t: &[Taylor]) -> Taylor {
        let one_minus = t[0].scale(-1.0).add_const(1.0);
        (&t[0].powf(self.a - 1.0) * &one_minus.powf(self.b - 1.0))
            .scale((-ln_beta(self.a, self.b)).exp())
    }
    fn exact_log_marginal(&self) -> Result<f64> {
        let (n, k) = (self.n as f64, self.k as f64);
        Ok(ln_beta(k + self.a, n - k + self.b) - ln_beta(self.a, self.b))
    }
}

/// ∫ xⁿ e^{−(n+1)x} dx = Γ(n+1)/(n+1)^{n+1}: h(x) = x − ln x with an
/// Exp(1) prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaKernel {
    pub n: u64,
}

impl LaplaceModel for GammaKernel {
    fn dim(&self) -> usize {
        1
    }
    fn n(&self) -> u64 {
        self.n
    }
    fn mle(&self) -> Vec<f64> {
        vec![1.0]
    }
    fn h(&self, t: &[Taylor]) -> Taylor {
        &t[0] - &t[0].ln()
    }
    fn prior(&self, t: &[Taylor]) -> Taylor {
        t[0].scale(-1.0).exp()
    }
    fn exact_log_marginal(&self) -> Result<f64> {
        let n = self.n as f64;
        Ok(ln_gamma(n + 1.0) - (n + 1.0) * (n + 1.0).ln())
    }
}

/// Prior on the effect size δ = μ/σ in the t-test models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EffectPrior {
    Normal { kappa: f64 },
    Cauchy { kappa: f64 },
}

/// Normal data summarized by the sample mean and the maximum-likelihood
/// variance, with the prior π(δ)σ⁻¹ on (δ, σ).
///
/// In (μ, σ) coordinates the prior density is π(μ/σ)·σ⁻², the extra σ⁻¹
/// being the Jacobian of δ = μ/σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestModel {
    pub n: u64,
    pub mean: f64,
    pub ml_variance: f64,
    pub prior: EffectPrior,
}

impl TTestModel {
    pub fn new(n: u64, mean: f64, ml_variance: f64, prior: EffectPrior) -> Result<Self> {
        check_n(n)?;
        let kappa = match prior {
            EffectPrior::Normal { kappa } | EffectPrior::Cauchy { kappa } => kappa,
        };
        if !(ml_variance > 0.0 && kappa > 0.0 && mean.is_finite()) {
            return invalid("variance and prior scale must be positive");
        }
        Ok(Self {
            n,
            mean,
            ml_variance,
            prior,
        })
    }

    /// Model whose MLE is exactly θ̂ = (μ̂, σ̂).
    pub fn at_mle(n: u64, mu_hat: f64, sigma_hat: f64, prior: EffectPrior) -> Result<Self> {
        Self::new(n, mu_hat, sigma_hat * sigma_hat, prior)
    }

    /// One-sample t statistic of the data.
    pub fn t_statistic(&self) -> f64 {
        self.mean * ((self.n - 1) as f64).sqrt() / self.ml_variance.sqrt()
    }

    /// Exact log marginal under N(0, κ²) on δ.
    fn normal_log_marginal(&self, kappa: f64) -> f64 {
        let n = self.n as f64;
        let b = self.ml_variance + self.mean * self.mean / (1.0 + n * kappa * kappa);
        -0.5 * n * (2.0 * PI).ln() - kappa.ln() - 0.5 * (n + 1.0 / (kappa * kappa)).ln()
            - 2f64.ln()
            + ln_gamma(n / 2.0)
            - 0.5 * n * (n * b / 2.0).ln()
    }

    /// Exact log marginal under the point null δ = 0.
    pub fn point_null_log_marginal(&self) -> f64 {
        let n = self.n as f64;
        let b = self.ml_variance + self.mean * self.mean;
        -0.5 * n * (2.0 * PI).ln() - 2f64.ln() + ln_gamma(n / 2.0) - 0.5 * n * (n * b / 2.0).ln()
    }
}

impl LaplaceModel for TTestModel {
    fn dim(&self) -> usize {
        2
    }
    fn n(&self) -> u64 {
        self.n
    }
    fn mle(&self) -> Vec<f64> {
        vec![self.mean, self.ml_variance.sqrt()]
    }
    fn h(&self, t: &[Taylor]) -> Taylor {
        let (mu, sigma) = (&t[0], &t[1]);
        let r = mu.add_const(-self.mean);
        let quad = &r.square().add_const(self.ml_variance) * &sigma.square().recip();
        &quad.scale(0.5) + &sigma.ln().add_const(half_ln_2pi())
    }
    fn prior(&self, t: &[Taylor]) -> Taylor {
        let (mu, sigma) = (&t[0], &t[1]);
        let delta = mu * &sigma.recip();
        let jacobian = sigma.powf(-2.0);
        let density = match self.prior {
            EffectPrior::Normal { kappa } => delta
                .square()
                .scale(-0.5 / (kappa * kappa))
                .exp()
                .scale(1.0 / ((2.0 * PI).sqrt() * kappa)),
            EffectPrior::Cauchy { kappa } => delta
                .square()
                .scale(1.0 / (kappa * kappa))
                .add_const(1.0)
                .recip()
                .scale(1.0 / (PI * kappa)),
        };
        &density * &jacobian
    }
    fn exact_log_marginal(&self) -> Result<f64> {
        match self.prior {
            EffectPrior::Normal { kappa } => Ok(self.normal_log_marginal(kappa)),
            EffectPrior::Cauchy { kappa } => {
                // Cauchy(0, κ) = N(0, gκ²) mixed over g ~ InvGamma(½, ½);
                // integrate over u = ln g.
                let log_f = |u: f64| {
                    let g = u.exp();
                    let log_mix = -half_ln_2pi() - 0.5 * u - 0.5 / g;
                    self.normal_log_marginal(kappa * g.sqrt()) + log_mix
                };
                let pts: Vec<f64> = (-120..=120).map(|k| k as f64 * 0.25).collect();
                let peak = pts.iter().map(|&u| log_f(u)).fold(f64::NEG_INFINITY, f64::max);
                let r = integrate(|u| (log_f(u) - peak).exp(), &pts, 1e-13, 1e-300, 2000);
                if !r.converged {
                    return Err(crate::error::Error::Convergence {
                        estimate: peak + r.value.ln(),
                        error_bound: r.error / r.value,
                    });
                }
                Ok(peak + r.value.ln())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::expansion::{laplace_c1, laplace_c2, coefficients_from_oracles};

    fn coeffs(model: &dyn LaplaceModel) -> crate::laplace::tensor::TensorCoeffs {
        let h = TaylorOracle::new(model.dim(), |t: &[Taylor]| model.h(t));
        let p = TaylorOracle::new(model.dim(), |t: &[Taylor]| model.prior(t));
        coefficients_from_oracles(&h, &p, &model.mle()).unwrap().0
    }

    #[test]
    fn ttest_peri_coefficients_match_exact_series() {
        // exact series of I(n)/leading(n) at θ̂ = (0, 1)
        let cases = [
            (0.05, -1199.0 / 6.0, 4317601.0 / 72.0),
            (1.0, -1.0 / 3.0, 11.0 / 36.0),
            (0.7, -251.0 / 294.0, 243001.0 / 172872.0),
        ];
        for (kappa, c1, c2) in cases {
            let m = TTestModel::at_mle(100, 0.0, 1.0, EffectPrior::Normal { kappa }).unwrap();
            let c = coeffs(&m);
            assert!((laplace_c1(&c).unwrap() - c1).abs() < 1e-9 * c1.abs().max(1.0));
            assert!((laplace_c2(&c).unwrap() - c2).abs() < 1e-9 * c2.abs().max(1.0));
        }
    }

    #[test]
    fn coefficients_do_not_depend_on_coordinate_order() {
        let m = TTestModel::at_mle(100, 0.3, 1.2, EffectPrior::Cauchy { kappa: 0.7 }).unwrap();
        let c = coeffs(&m);
        let swapped = c.permuted(&[1, 0]);
        assert!((laplace_c1(&c).unwrap() - laplace_c1(&swapped).unwrap()).abs() < 1e-12);
        assert!((laplace_c2(&c).unwrap() - laplace_c2(&swapped).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn exact_normal_marginal_by_quadrature() {
        // integrate the (μ, σ) integrand directly for a small n
        let m = TTestModel::new(6, 0.4, 0.8, EffectPrior::Normal { kappa: 0.6 }).unwrap();
        let lik = |mu: f64, s: f64| {
            let t = Taylor::variables(&[mu, s], 0);
            -(m.n as f64) * m.h(&t).value() + m.prior(&t).value().ln()
        };
        let inner = |s: f64| {
            let pts: Vec<f64> = (-12..=12).map(|j| 0.4 * j as f64 / 12.0 + s * j as f64).collect();
            let r = integrate(|mu| lik(mu, s).exp(), &pts, 1e-13, 1e-300, 500);
            assert!(r.converged);
            r.value
        };
        let outer = integrate(inner, &[1e-3, 0.2, 0.5, 0.9, 1.5, 3.0, 10.0, 60.0], 1e-11, 1e-300, 500);
        let exact = m.exact_log_marginal().unwrap();
        assert!(outer.converged);
        assert!((outer.value.ln() - exact).abs() < 1e-8, "{} vs {exact}", outer.value.ln());
    }

    #[test]
    fn finite_difference_path_agrees() {
        let m = TTestModel::at_mle(200, 0.0, 1.0, EffectPrior::Normal { kappa: 0.05 }).unwrap();
        let a = expand_model(&m, DerivativeSource::Analytic).unwrap();
        let f = expand_model(&m, DerivativeSource::FiniteDifference).unwrap();
        assert!((a.c1 - f.c1).abs() < 5.0, "{} vs {}", a.c1, f.c1);
        assert!((a.leading - f.leading).abs() < 1e-6);
    }

    #[test]
    fn models_validate_inputs() {
        assert!(BetaBernoulli::new(10, 0, 1.0, 1.0).is_err());
        assert!(BetaBernoulli::new(10, 10, 1.0, 1.0).is_err());
        assert!(ConjugateGaussian::new(1, 0.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(TTestModel::new(10, 0.0, 0.0, EffectPrior::Normal { kappa: 1.0 }).is_err());
    }
}
