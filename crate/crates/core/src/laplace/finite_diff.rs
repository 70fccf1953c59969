//! Numerical derivative tensors for low-dimensional functions.
//!
//! Each mixed partial ∂^{m₀}_x ∂^{m₁}_y is a tensor product of central
//! difference operators, whose truncation error is a series in h². A
//! Richardson tableau over halved steps removes those terms; the entry with
//! the smallest consistency error is kept (Ridders' rule) and a roundoff
//! estimate is added to the reported error.

use super::expansion::DerivativeOracle;
use super::tensor::{count_vectors, Counts, SymTensor};
use crate::error::{Error, Result};

pub const MAX_FD_DIM: usize = 2;
pub const MAX_FD_ORDER: usize = 6;

/// Steps used: the nominal step and 2, 4, 8 times it.
const ROWS: usize = 4;

/// Derivative tensors of orders 0..=max_order with per-entry error
/// estimates of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FdDerivatives {
    pub values: Vec<SymTensor>,
    pub errors: Vec<SymTensor>,
}

fn binomial(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// One tensor-product central difference. Returns the estimate and the sum
/// of |weight · f| used to bound roundoff.
fn stencil<F: Fn(&[f64]) -> f64>(
    f: &F,
    point: &[f64],
    c: Counts,
    steps: &[f64],
) -> Result<(f64, f64)> {
    let dim = point.len();
    let m0 = c[0];
    let m1 = if dim > 1 { c[1] } else { 0 };
    let mut sum = 0.0;
    let mut mag = 0.0;
    let mut x = point.to_vec();
    for j0 in 0..=m0 {
        x[0] = point[0] + (m0 as f64 / 2.0 - j0 as f64) * steps[0];
        for j1 in 0..=m1 {
            if dim > 1 {
                x[1] = point[1] + (m1 as f64 / 2.0 - j1 as f64) * steps[1];
            }
            let v = f(&x);
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "function is not finite at {x:?} inside the difference stencil"
                )));
            }
            let sign = if (j0 + j1) % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * binomial(m0, j0) * binomial(m1, j1);
            sum += w * v;
            mag += (w * v).abs();
        }
    }
    let denom = steps[0].powi(m0 as i32) * if dim > 1 { steps[1].powi(m1 as i32) } else { 1.0 };
    Ok((sum / denom, mag / denom))
}

fn partial<F: Fn(&[f64]) -> f64>(f: &F, point: &[f64], c: Counts) -> Result<(f64, f64)> {
    let order: usize = c.iter().sum();
    let nominal = f64::EPSILON.powf(1.0 / (order as f64 + 2.0));
    let base: Vec<f64> = point.iter().map(|x| nominal * x.abs().max(1.0)).collect();

    let mut prev: Vec<f64> = Vec::new();
    let mut best = (f64::NAN, f64::INFINITY);
    for row in 0..ROWS {
        let factor = (1 << (ROWS - 1 - row)) as f64;
        let steps: Vec<f64> = base.iter().map(|h| h * factor).collect();
        let (est, mag) = stencil(f, point, c, &steps)?;
        let roundoff = 4.0 * f64::EPSILON * mag;
        let mut line = vec![est];
        for j in 1..=row {
            let next = line[j - 1] + (line[j - 1] - prev[j - 1]) / (4f64.powi(j as i32) - 1.0);
            let err = (next - line[j - 1]).abs().max((next - prev[j - 1]).abs()) + roundoff;
            if err < best.1 {
                best = (next, err);
            }
            line.push(next);
        }
        // stop once the diagonal starts to drift away from the best entry
        if row > 0 && (line[row] - prev[row - 1]).abs() > 2.0 * best.1 {
            break;
        }
        prev = line;
    }
    Ok(best)
}

/// Derivatives of `f` at `point` up to `max_order` by central differences
/// with Richardson extrapolation. Only one- and two-dimensional functions
/// are supported.
pub fn finite_difference_derivatives<F: Fn(&[f64]) -> f64>(
    f: F,
    point: &[f64],
    max_order: usize,
) -> Result<FdDerivatives> {
    let dim = point.len();
    if dim == 0 || dim > MAX_FD_DIM {
        return Err(Error::Unsupported(format!(
            "finite differences are limited to 1 or 2 dimensions, got {dim}"
        )));
    }
    if max_order > MAX_FD_ORDER {
        return Err(Error::Unsupported(format!(
            "finite differences are limited to order {MAX_FD_ORDER}, got {max_order}"
        )));
    }
    let f0 = f(point);
    if !f0.is_finite() {
        return Err(Error::InvalidInput(format!("function is not finite at {point:?}")));
    }
    let mut values = vec![SymTensor::from_counts(dim, 0, |_| f0)];
    let mut errors = vec![SymTensor::from_counts(dim, 0, |_| f64::EPSILON * f0.abs())];
    for order in 1..=max_order {
        let mut v = SymTensor::zeros(dim, order);
        let mut e = SymTensor::zeros(dim, order);
        for c in count_vectors(dim, order) {
            let (est, err) = partial(&f, point, c)?;
            v.set_counts(c, est);
            e.set_counts(c, err);
        }
        values.push(v);
        errors.push(e);
    }
    Ok(FdDerivatives { values, errors })
}

/// A derivative oracle backed by finite differences of a scalar function.
pub struct FiniteDifferenceOracle<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FiniteDifferenceOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64> DerivativeOracle for FiniteDifferenceOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn derivatives(&self, point: &[f64], max_order: usize) -> Result<Vec<SymTensor>> {
        finite_difference_derivatives(&self.f, point, max_order).map(|d| d.values)
    }
}
