//! Truncated multivariate Taylor polynomials in up to three variables.
//!
//! Used to build exact derivative tensors of closed-form model functions.
//! Elementary functions are applied by composing their univariate series
//! with the nilpotent part of the argument.

use std::ops::{Add, Mul, Neg, Sub};

use super::tensor::{count_vectors, Counts, SymTensor, MAX_DIM};

/// Coefficients of Σ a_c (x − x₀)^c over count vectors c with |c| ≤ degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor {
    dim: usize,
    degree: usize,
    coef: Vec<f64>,
}

impl Taylor {
    fn side(&self) -> usize {
        self.degree + 1
    }

    fn slot(&self, c: Counts) -> usize {
        let s = self.side();
        c[0] + s * (c[1] + s * c[2])
    }

    fn zeros(dim: usize, degree: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        let s = degree + 1;
        Self {
            dim,
            degree,
            coef: vec![0.0; s * s * s],
        }
    }

    pub fn constant(dim: usize, degree: usize, value: f64) -> Self {
        let mut t = Self::zeros(dim, degree);
        t.coef[0] = value;
        t
    }

    /// The coordinate function θ_i expanded at `value`.
    pub fn variable(dim: usize, degree: usize, i: usize, value: f64) -> Self {
        let mut t = Self::constant(dim, degree, value);
        if degree > 0 {
            let mut c = [0; MAX_DIM];
            c[i] = 1;
            let s = t.slot(c);
            t.coef[s] = 1.0;
        }
        t
    }

    /// Expansions of all coordinates at `point`.
    pub fn variables(point: &[f64], degree: usize) -> Vec<Self> {
        (0..point.len())
            .map(|i| Self::variable(point.len(), degree, i, point[i]))
            .collect()
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    fn terms(&self) -> impl Iterator<Item = Counts> + '_ {
        (0..=self.degree).flat_map(move |k| count_vectors(self.dim, k))
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut t = self.clone();
        t.coef.iter_mut().for_each(|v| *v *= k);
        t
    }

    pub fn add_const(&self, k: f64) -> Self {
        let mut t = self.clone();
        t.coef[0] += k;
        t
    }

    /// Σ_k a_k (self − self₀)^k for univariate series coefficients `a`.
    fn compose(&self, a: &[f64]) -> Self {
        let mut nil = self.clone();
        nil.coef[0] = 0.0;
        let mut out = Self::constant(self.dim, self.degree, a[0]);
        let mut power = Self::constant(self.dim, self.degree, 1.0);
        for &ak in &a[1..=self.degree] {
            power = &power * &nil;
            out = &out + &power.scale(ak);
        }
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let mut a = vec![e; self.degree + 1];
        let mut fact = 1.0;
        for (k, ak) in a.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            *ak = e / fact;
        }
        self.compose(&a)
    }

    pub fn ln(&self) -> Self {
        let x = self.value();
        let mut a = vec![x.ln(); self.degree + 1];
        for (k, ak) in a.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *ak = sign / (k as f64 * x.powi(k as i32));
        }
        self.compose(&a)
    }

    pub fn powf(&self, p: f64) -> Self {
        let x = self.value();
        let mut a = vec![0.0; self.degree + 1];
        let mut binom = 1.0;
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = binom * x.powf(p - k as f64);
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&a)
    }

    pub fn recip(&self) -> Self {
        self.powf(-1.0)
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Derivative tensors of orders 0..=degree at the expansion point.
    pub fn derivative_tensors(&self) -> Vec<SymTensor> {
        let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
        (0..=self.degree)
            .map(|k| {
                SymTensor::from_counts(self.dim, k, |c| {
                    self.coef[self.slot(c)] * fact(c[0]) * fact(c[1]) * fact(c[2])
                })
            })
            .collect()
    }
}

impl Add for &Taylor {
    type Output = Taylor;
    fn add(self, rhs: &Taylor) -> Taylor {
        let mut t = self.clone();
        t.coef.iter_mut().zip(&rhs.coef).for_each(|(a, b)| *a += b);
        t
    }
}

impl Sub for &Taylor {
    type Output = Taylor;
    fn sub(self, rhs: &Taylor) -> Taylor {
        let mut t = self.clone();
        t.coef.iter_mut().zip(&rhs.coef).for_each(|(a, b)| *a -= b);
        t
    }
}

impl Neg for &Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        self.scale(-1.0)
    }
}

impl Mul for &Taylor {
    type Output = Taylor;
    fn mul(self, rhs: &Taylor) -> Taylor {
        assert_eq!((self.dim, self.degree), (rhs.dim, rhs.degree));
        let mut out = Taylor::zeros(self.dim, self.degree);
        let terms: Vec<Counts> = self.terms().collect();
        for &a in &terms {
            let va = self.coef[self.slot(a)];
            if va == 0.0 {
                continue;
            }
            let da: usize = a.iter().sum();
            for &b in &terms {
                if da + b.iter().sum::<usize>() > self.degree {
                    continue;
                }
                let vb = rhs.coef[rhs.slot(b)];
                if vb != 0.0 {
                    let s = out.slot([a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
                    out.coef[s] += va * vb;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_sin_like_derivatives() {
        // f(x, y) = exp(x) · y³ at (0.3, 2)
        let v = Taylor::variables(&[0.3, 2.0], 4);
        let f = &v[0].exp() * &(&v[1] * &v[1].square());
        let d = f.derivative_tensors();
        let e = 0.3f64.exp();
        assert!((d[0].get(&[]) - 8.0 * e).abs() < 1e-13);
        assert!((d[2].get(&[1, 1]) - 12.0 * e).abs() < 1e-12);
        assert!((d[3].get(&[0, 1, 1]) - 12.0 * e).abs() < 1e-12);
        assert!((d[4].get(&[1, 1, 1, 1])).abs() < 1e-12);
        assert!((d[4].get(&[0, 1, 1, 1]) - 6.0 * e).abs() < 1e-12);
    }

    #[test]
    fn ln_and_powers_invert() {
        let x = Taylor::variable(1, 6, 0, 1.7);
        let back = x.ln().exp();
        for (a, b) in back.coef.iter().zip(&x.coef) {
            assert!((a - b).abs() < 1e-13);
        }
        let r = &x.recip() * &x;
        assert!((r.value() - 1.0).abs() < 1e-15);
        let d = x.powf(-2.0).derivative_tensors();
        // d⁶/dx⁶ x⁻² = 5040 x⁻⁸
        assert!((d[6].get(&[0; 6]) - 5040.0 * 1.7f64.powi(-8)).abs() < 1e-10);
    }

    #[test]
    fn three_variables() {
        let v = Taylor::variables(&[1.0, 2.0, 3.0], 3);
        let f = &(&v[0] * &v[1]) * &v[2];
        let d = f.derivative_tensors();
        assert_eq!(d[3].get(&[2, 0, 1]), 1.0);
        assert_eq!(d[3].get(&[0, 0, 1]), 0.0);
        assert_eq!(d[2].get(&[0, 2]), 2.0);
    }
}
