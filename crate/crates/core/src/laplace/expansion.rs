//! Correction coefficients of the Laplace expansion
//!
//! ```text
//! ∫ exp(−n h(θ)) π(θ) dθ
//!   = (2π/n)^{p/2} e^{−n h(θ̂)} π(θ̂) |Î|^{−1/2} (1 + C⁽¹⁾/n + C⁽²⁾/n² + O(n⁻³))
//! ```
//!
//! Both coefficients are Einstein-summed products of derivative tensors
//! contracted against Gaussian moments of Q ~ N(0, Î⁻¹). Repeated indices
//! inside a tensor are folded by symmetry: each factor runs over its
//! distinct index multisets weighted by their multiplicity, and the moment
//! depends only on the combined multiset.

use serde::{Deserialize, Serialize};

use super::isserlis::MomentTable;
use super::tensor::{count_vectors, multiplicity, Counts, SymTensor, TensorCoeffs};
use crate::error::{invalid, Result};

/// Σ over all index sequences of Π factorᵢ(own indices) · ς(all indices).
fn contract(factors: &[&SymTensor], moments: &MomentTable) -> Result<f64> {
    let dim = moments.dim();
    let per_factor: Vec<Vec<(Counts, f64)>> = factors
        .iter()
        .map(|f| {
            count_vectors(dim, f.order())
                .into_iter()
                .map(|c| (c, multiplicity(c) * f.get_counts(c)))
                .filter(|&(_, w)| w != 0.0)
                .collect()
        })
        .collect();

    fn walk(
        level: usize,
        acc: Counts,
        weight: f64,
        per_factor: &[Vec<(Counts, f64)>],
        moments: &MomentTable,
    ) -> Result<f64> {
        if level == per_factor.len() {
            return Ok(weight * moments.moment_counts(acc)?);
        }
        let mut sum = 0.0;
        for &(c, w) in &per_factor[level] {
            let next = [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]];
            sum += walk(level + 1, next, weight * w, per_factor, moments)?;
        }
        Ok(sum)
    }
    walk(0, [0; 3], 1.0, &per_factor, moments)
}

fn moments_for(coeffs: &TensorCoeffs) -> Result<MomentTable> {
    MomentTable::new(coeffs.covariance()?)
}

/// C⁽¹⁾ against a prebuilt moment table for the same covariance.
pub fn laplace_c1_with(c: &TensorCoeffs, m: &MomentTable) -> Result<f64> {
    let p = c.prior_value;
    let h3 = c.h(3);
    Ok(contract(&[c.prior(2)], m)? / (2.0 * p) - contract(&[c.h(4)], m)? / 24.0
        - contract(&[h3, c.prior(1)], m)? / (6.0 * p)
        + contract(&[h3, h3], m)? / 72.0)
}

/// C⁽²⁾ against a prebuilt moment table for the same covariance.
pub fn laplace_c2_with(c: &TensorCoeffs, m: &MomentTable) -> Result<f64> {
    let p = c.prior_value;
    let (h3, h4, h5, h6) = (c.h(3), c.h(4), c.h(5), c.h(6));
    let (p1, p2, p3, p4) = (c.prior(1), c.prior(2), c.prior(3), c.prior(4));

    let order4 = contract(&[p4], m)? / (24.0 * p);
    let order6 = (p * contract(&[h6], m)?
        + 6.0 * contract(&[h5, p1], m)?
        + 15.0 * contract(&[h4, p2], m)?
        + 20.0 * contract(&[h3, p3], m)?)
        / (720.0 * p);
    let order8 = (5.0 * p * contract(&[h4, h4], m)?
        + 8.0 * p * contract(&[h5, h3], m)?
        + 40.0 * contract(&[h3, h4, p1], m)?
        + 40.0 * contract(&[h3, h3, p2], m)?)
        / (5760.0 * p);
    let order10 = (3.0 * p * contract(&[h4, h3, h3], m)? + 4.0 * contract(&[h3, h3, h3, p1], m)?)
        / (5184.0 * p);
    let order12 = contract(&[h3, h3, h3, h3], m)? / 31104.0;
    Ok(order4 - order6 + order8 - order10 + order12)
}

/// The O(n⁻¹) coefficient C⁽¹⁾.
pub fn laplace_c1(coeffs: &TensorCoeffs) -> Result<f64> {
    laplace_c1_with(coeffs, &moments_for(coeffs)?)
}

/// The O(n⁻²) coefficient C⁽²⁾.
pub fn laplace_c2(coeffs: &TensorCoeffs) -> Result<f64> {
    laplace_c2_with(coeffs, &moments_for(coeffs)?)
}

/// Supplies a scalar function's value and derivative tensors at a point.
pub trait DerivativeOracle {
    fn dim(&self) -> usize;

    /// Tensors of orders `0..=max_order`; entry `k` has order `k`.
    fn derivatives(&self, point: &[f64], max_order: usize) -> Result<Vec<SymTensor>>;
}

/// Log Laplace approximations of a marginal likelihood at three truncation
/// levels.
///
/// When a correction bracket 1 + C⁽¹⁾/n (+ C⁽²⁾/n²) is not positive its log
/// does not exist; the matching field is `None`, `valid` is false and the
/// raw brackets are kept for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceMarginal {
    pub leading: f64,
    pub with_c1: Option<f64>,
    pub with_c2: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    pub bracket_c1: f64,
    pub bracket_c2: f64,
    pub valid: bool,
}

impl LaplaceMarginal {
    /// Assembles the three levels from log f(yⁿ|θ̂), the coefficients and n.
    pub fn assemble(log_lik_at_mle: f64, coeffs: &TensorCoeffs, c1: f64, c2: f64, n: f64) -> Result<Self> {
        let p = coeffs.dim as f64;
        let leading = 0.5 * p * (2.0 * std::f64::consts::PI / n).ln() + log_lik_at_mle
            + coeffs.prior_value.ln()
            - 0.5 * coeffs.log_det_information()?;
        let bracket_c1 = 1.0 + c1 / n;
        let bracket_c2 = bracket_c1 + c2 / (n * n);
        let level = |b: f64| (b > 0.0).then(|| leading + b.ln());
        Ok(Self {
            leading,
            with_c1: level(bracket_c1),
            with_c2: level(bracket_c2),
            c1,
            c2,
            bracket_c1,
            bracket_c2,
            valid: bracket_c1 > 0.0 && bracket_c2 > 0.0,
        })
    }
}

/// Gathers h derivatives of orders 2..=6 and prior derivatives of orders
/// 0..=4 at `mle`. Returns the coefficients and h(θ̂).
pub fn coefficients_from_oracles(
    h_oracle: &dyn DerivativeOracle,
    prior_oracle: &dyn DerivativeOracle,
    mle: &[f64],
) -> Result<(TensorCoeffs, f64)> {
    if h_oracle.dim() != mle.len() || prior_oracle.dim() != mle.len() {
        return invalid("oracle dimensions do not match the MLE");
    }
    let mut h = h_oracle.derivatives(mle, 6)?;
    let mut prior = prior_oracle.derivatives(mle, 4)?;
    if h.len() != 7 || prior.len() != 5 {
        return invalid("oracle returned the wrong number of derivative orders");
    }
    let h0 = h[0].get_counts([0; 3]);
    let prior_value = prior[0].get_counts([0; 3]);
    let h_derivs = h.drain(2..).collect();
    let prior_derivs = prior.drain(1..).collect();
    let coeffs = TensorCoeffs::new(mle.to_vec(), h_derivs, prior_value, prior_derivs)?;
    Ok((coeffs, h0))
}

/// Laplace approximation of log ∫ exp(−n h(θ)) π(θ) dθ where `h_oracle`
/// describes h = −(1/n) log f(yⁿ|θ) and `mle` minimizes h.
///
/// Assumes a single interior global minimum of h; only positive
/// definiteness of the information at `mle` is checked.
pub fn laplace_marginal(
    h_oracle: &dyn DerivativeOracle,
    prior_oracle: &dyn DerivativeOracle,
    mle: &[f64],
    n: u64,
) -> Result<LaplaceMarginal> {
    if n == 0 {
        return invalid("sample size must be positive");
    }
    let (coeffs, h0) = coefficients_from_oracles(h_oracle, prior_oracle, mle)?;
    let moments = moments_for(&coeffs)?;
    let c1 = laplace_c1_with(&coeffs, &moments)?;
    let c2 = laplace_c2_with(&coeffs, &moments)?;
    let nf = n as f64;
    LaplaceMarginal::assemble(-nf * h0, &coeffs, c1, c2, nf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros(dim: usize, orders: std::ops::RangeInclusive<usize>) -> Vec<SymTensor> {
        orders.map(|k| SymTensor::zeros(dim, k)).collect()
    }

    /// Quadratic h with information `info` and a constant prior.
    fn gaussian_coeffs(dim: usize, info: &[f64]) -> TensorCoeffs {
        let mut h = zeros(dim, 2..=6);
        h[0] = SymTensor::from_counts(dim, 2, |c| {
            let idx: Vec<usize> = (0..dim).flat_map(|i| std::iter::repeat_n(i, c[i])).collect();
            info[idx[0] * dim + idx[1]]
        });
        TensorCoeffs::new(vec![0.0; dim], h, 0.7, zeros(dim, 1..=4)).unwrap()
    }

    #[test]
    fn gaussian_integrand_has_no_corrections() {
        let one = gaussian_coeffs(1, &[2.5]);
        assert_eq!(laplace_c1(&one).unwrap(), 0.0);
        assert_eq!(laplace_c2(&one).unwrap(), 0.0);
        let three = gaussian_coeffs(3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 1.5]);
        assert_eq!(laplace_c1(&three).unwrap(), 0.0);
        assert_eq!(laplace_c2(&three).unwrap(), 0.0);
    }

    /// h(x) = x − log x at x̂ = 1, flat prior: the Gamma-function integral
    /// ∫ xⁿ e^{−nx} dx with Stirling coefficients 1/12 and 1/288.
    #[test]
    fn stirling_coefficients() {
        let mut h = zeros(1, 2..=6);
        // d^k/dx^k (−log x) at 1 = (−1)^k (k−1)!
        for k in 2..=6 {
            let v = if k % 2 == 0 { 1.0 } else { -1.0 } * (1..k).product::<usize>() as f64;
            h[k - 2].set_counts([k, 0, 0], v);
        }
        let c = TensorCoeffs::new(vec![1.0], h, 1.0, zeros(1, 1..=4)).unwrap();
        assert!((laplace_c1(&c).unwrap() - 1.0 / 12.0).abs() < 1e-14);
        assert!((laplace_c2(&c).unwrap() - 1.0 / 288.0).abs() < 1e-14);
    }

    #[test]
    fn bracket_failure_is_flagged_not_clamped() {
        let c = gaussian_coeffs(1, &[1.0]);
        let r = LaplaceMarginal::assemble(-3.0, &c, -200.0, 3000.0, 100.0).unwrap();
        assert!(!r.valid);
        assert_eq!(r.with_c1, None);
        assert_eq!(r.bracket_c1, -1.0);
        assert!((r.bracket_c2 - (-0.7)).abs() < 1e-12);
        let ok = LaplaceMarginal::assemble(-3.0, &c, -200.0, 3000.0, 400.0).unwrap();
        assert!(ok.valid && ok.with_c2.is_some());
    }
}
