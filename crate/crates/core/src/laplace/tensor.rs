//! Symmetric derivative tensors and the coefficient bundle fed to the
//! expansion.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest supported parameter dimension.
pub const MAX_DIM: usize = 3;

/// Number of times each coordinate occurs in a multi-index.
pub type Counts = [usize; MAX_DIM];

pub fn counts_of(indices: &[usize]) -> Counts {
    let mut c = [0; MAX_DIM];
    for &i in indices {
        c[i] += 1;
    }
    c
}

/// All count vectors of total `order` over `dim` coordinates, in
/// lexicographically decreasing order of the first coordinate.
pub fn count_vectors(dim: usize, order: usize) -> Vec<Counts> {
    let mut out = Vec::new();
    match dim {
        1 => out.push([order, 0, 0]),
        2 => {
            for c0 in (0..=order).rev() {
                out.push([c0, order - c0, 0]);
            }
        }
        _ => {
            for c0 in (0..=order).rev() {
                for c1 in (0..=order - c0).rev() {
                    out.push([c0, c1, order - c0 - c1]);
                }
            }
        }
    }
    out
}

/// Number of distinct index sequences with the given counts.
pub fn multiplicity(c: Counts) -> f64 {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    fact(c[0] + c[1] + c[2]) / (fact(c[0]) * fact(c[1]) * fact(c[2]))
}

/// A fully symmetric array of a given order over `dim ≤ 3` coordinates.
///
/// Only one value per distinct multiset of indices is stored, addressed by
/// how often each coordinate occurs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensor {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

impl SymTensor {
    pub fn zeros(dim: usize, order: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension must be 1..=3");
        Self {
            dim,
            order,
            data: vec![0.0; (order + 1) * (order + 1)],
        }
    }

    /// Builds a tensor by evaluating `f` once per distinct count vector.
    pub fn from_counts(dim: usize, order: usize, f: impl Fn(Counts) -> f64) -> Self {
        let mut t = Self::zeros(dim, order);
        for c in count_vectors(dim, order) {
            t.set_counts(c, f(c));
        }
        t
    }

    pub fn scalar(value: f64) -> Self {
        let mut t = Self::zeros(1, 0);
        t.data[0] = value;
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn slot(&self, c: Counts) -> usize {
        debug_assert_eq!(c[0] + c[1] + c[2], self.order);
        c[0] * (self.order + 1) + c[1]
    }

    pub fn get_counts(&self, c: Counts) -> f64 {
        self.data[self.slot(c)]
    }

    pub fn set_counts(&mut self, c: Counts, value: f64) {
        let s = self.slot(c);
        self.data[s] = value;
    }

    /// Component at an index sequence; any permutation gives the same value.
    pub fn get(&self, indices: &[usize]) -> f64 {
        debug_assert_eq!(indices.len(), self.order);
        self.get_counts(counts_of(indices))
    }

    /// Relabels coordinates: the new coordinate `i` is the old `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_counts(self.dim, self.order, |c| {
            let mut old = [0; MAX_DIM];
            for i in 0..self.dim {
                old[perm[i]] = c[i];
            }
            self.get_counts(old)
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// The order-2 tensor as a dense matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.order, 2);
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(&[i, j]))
    }
}

/// Derivatives of h(θ) = −(1/n) Σ log f(yᵢ | θ) and of the prior density at
/// the maximum-likelihood estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorCoeffs {
    pub dim: usize,
    pub mle: Vec<f64>,
    /// Orders 2 through 6; `h_derivs[k]` has order `k + 2`.
    pub h_derivs: Vec<SymTensor>,
    pub prior_value: f64,
    /// Orders 1 through 4; `prior_derivs[k]` has order `k + 1`.
    pub prior_derivs: Vec<SymTensor>,
}

impl TensorCoeffs {
    pub fn new(
        mle: Vec<f64>,
        h_derivs: Vec<SymTensor>,
        prior_value: f64,
        prior_derivs: Vec<SymTensor>,
    ) -> Result<Self> {
        let dim = mle.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Unsupported(format!(
                "parameter dimension {dim} (supported: 1 to {MAX_DIM})"
            )));
        }
        if h_derivs.len() != 5 || prior_derivs.len() != 4 {
            return invalid("expected h derivatives of orders 2..=6 and prior derivatives of orders 1..=4");
        }
        for (k, t) in h_derivs.iter().enumerate() {
            if t.dim() != dim || t.order() != k + 2 {
                return invalid(format!("h tensor {k} has the wrong shape"));
            }
        }
        for (k, t) in prior_derivs.iter().enumerate() {
            if t.dim() != dim || t.order() != k + 1 {
                return invalid(format!("prior tensor {k} has the wrong shape"));
            }
        }
        if !(prior_value > 0.0 && prior_value.is_finite()) {
            return invalid(format!("prior density at the MLE must be positive, got {prior_value}"));
        }
        if !h_derivs.iter().chain(&prior_derivs).all(SymTensor::is_finite) {
            return Err(Error::NonFinite("derivative tensor entry".into()));
        }
        let c = Self {
            dim,
            mle,
            h_derivs,
            prior_value,
            prior_derivs,
        };
        c.covariance()?;
        Ok(c)
    }

    /// h tensor of the given order (2..=6).
    pub fn h(&self, order: usize) -> &SymTensor {
        &self.h_derivs[order - 2]
    }

    /// Prior derivative tensor of the given order (1..=4).
    pub fn prior(&self, order: usize) -> &SymTensor {
        &self.prior_derivs[order - 1]
    }

    /// Observed information Î(θ̂) = ∇²h.
    pub fn information(&self) -> DMatrix<f64> {
        self.h(2).to_matrix()
    }

    /// Σ = Î⁻¹, failing unless Î is symmetric positive definite.
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        let info = self.information();
        info.clone()
            .cholesky()
            .map(|ch| ch.inverse())
            .ok_or_else(|| {
                Error::InvalidInput(format!("observed information is not positive definite: {info}"))
            })
    }

    pub fn log_det_information(&self) -> Result<f64> {
        let ch = self.information().cholesky().ok_or_else(|| {
            Error::InvalidInput("observed information is not positive definite".into())
        })?;
        Ok(2.0 * ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
    }

    /// The same coefficients with coordinates relabeled by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            dim: self.dim,
            mle: perm.iter().map(|&p| self.mle[p]).collect(),
            h_derivs: self.h_derivs.iter().map(|t| t.permuted(perm)).collect(),
            prior_value: self.prior_value,
            prior_derivs: self.prior_derivs.iter().map(|t| t.permuted(perm)).collect(),
        }
    }
}
