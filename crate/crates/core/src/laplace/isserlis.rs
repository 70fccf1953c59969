//! Gaussian moment tensors by Isserlis' theorem.
//!
//! For Q ~ N(0, Σ) the moment E[Q_{a₁}⋯Q_{a_w}] is the sum, over all ways of
//! splitting the w positions into pairs, of the product of the paired
//! covariances. There are (w − 1)!! such pairings.

use std::collections::HashMap;
use std::sync::RwLock;

use nalgebra::DMatrix;

use super::tensor::{counts_of, Counts, SymTensor, MAX_DIM};
use crate::error::{invalid, Error, Result};

/// Highest moment order the expansion needs.
pub const MAX_MOMENT_ORDER: usize = 12;

/// (w − 1)!!, the number of pair partitions of w items.
pub fn pair_partition_count(w: usize) -> Result<u64> {
    if w < 2 || w % 2 == 1 {
        return invalid(format!("pair partitions need an even count of at least 2, got {w}"));
    }
    Ok((1..w as u64).step_by(2).product())
}

fn check_covariance(cov: &DMatrix<f64>) -> Result<()> {
    if !cov.is_square() || cov.nrows() == 0 {
        return invalid("covariance must be a non-empty square matrix");
    }
    let scale = cov.amax().max(f64::MIN_POSITIVE);
    for i in 0..cov.nrows() {
        for j in 0..i {
            if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                return invalid("covariance must be symmetric");
            }
        }
    }
    Ok(())
}

/// Sums over pairings of `rest`, returning (value, number of pairings).
fn pair_sum(rest: &mut Vec<usize>, cov: &DMatrix<f64>) -> (f64, u64) {
    if rest.is_empty() {
        return (1.0, 1);
    }
    let first = rest.remove(0);
    let mut total = 0.0;
    let mut terms = 0;
    for k in 0..rest.len() {
        let partner = rest.remove(k);
        let (v, n) = pair_sum(rest, cov);
        total += cov[(first, partner)] * v;
        terms += n;
        rest.insert(k, partner);
    }
    rest.insert(0, first);
    (total, terms)
}

/// The moment E[Q_{a₁}⋯Q_{a_w}] for Q ~ N(0, cov) together with the number
/// of pair-partition products summed. Odd orders are zero with no terms.
pub fn isserlis_moment_counted(indices: &[usize], cov: &DMatrix<f64>) -> Result<(f64, u64)> {
    check_covariance(cov)?;
    let w = indices.len();
    if w > MAX_MOMENT_ORDER {
        return Err(Error::Unsupported(format!(
            "moment order {w} exceeds {MAX_MOMENT_ORDER}"
        )));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= cov.nrows()) {
        return invalid(format!("index {bad} out of range for a {0}x{0} covariance", cov.nrows()));
    }
    if w % 2 == 1 {
        return Ok((0.0, 0));
    }
    Ok(pair_sum(&mut indices.to_vec(), cov))
}

/// The Gaussian moment E[Q_{a₁}⋯Q_{a_w}], Q ~ N(0, cov). Odd orders return
/// zero; orders above 12 are refused.
pub fn isserlis_moment(indices: &[usize], cov: &DMatrix<f64>) -> Result<f64> {
    isserlis_moment_counted(indices, cov).map(|(v, _)| v)
}

/// Memoized moments of N(0, Σ), one entry per distinct multiset of indices.
///
/// Safe to share between threads; the cache sits behind a read-write lock.
#[derive(Debug)]
pub struct MomentTable {
    covariance: DMatrix<f64>,
    cache: RwLock<HashMap<Counts, f64>>,
}

impl MomentTable {
    pub fn new(covariance: DMatrix<f64>) -> Result<Self> {
        check_covariance(&covariance)?;
        if covariance.nrows() > MAX_DIM {
            return Err(Error::Unsupported(format!(
                "dimension {} exceeds {MAX_DIM}",
                covariance.nrows()
            )));
        }
        if covariance.clone().cholesky().is_none() {
            return invalid("covariance must be positive definite");
        }
        Ok(Self {
            covariance,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// ς with index counts `c`.
    pub fn moment_counts(&self, c: Counts) -> Result<f64> {
        let order = c.iter().sum::<usize>();
        if order % 2 == 1 {
            return Ok(0.0);
        }
        if let Some(&v) = self.cache.read().expect("moment cache poisoned").get(&c) {
            return Ok(v);
        }
        let mut indices = Vec::with_capacity(order);
        for (i, &k) in c.iter().enumerate() {
            indices.extend(std::iter::repeat_n(i, k));
        }
        let v = isserlis_moment(&indices, &self.covariance)?;
        self.cache.write().expect("moment cache poisoned").insert(c, v);
        Ok(v)
    }

    pub fn moment(&self, indices: &[usize]) -> Result<f64> {
        self.moment_counts(counts_of(indices))
    }

    /// The full order-w moment tensor.
    pub fn tensor(&self, order: usize) -> Result<SymTensor> {
        if order > MAX_MOMENT_ORDER {
            return Err(Error::Unsupported(format!(
                "moment order {order} exceeds {MAX_MOMENT_ORDER}"
            )));
        }
        let mut t = SymTensor::zeros(self.dim(), order);
        for c in super::tensor::count_vectors(self.dim(), order) {
            t.set_counts(c, self.moment_counts(c)?);
        }
        Ok(t)
    }

    /// Number of memoized entries.
    pub fn cached_entries(&self) -> usize {
        self.cache.read().expect("moment cache poisoned").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spd3() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.4, 0.3, 1.5, 0.2, -0.4, 0.2, 0.8])
    }

    #[test]
    fn identity_covariance_examples() {
        let id = DMatrix::identity(4, 4);
        assert_eq!(isserlis_moment(&[0, 1, 2, 3], &id).unwrap(), 0.0);
        assert_eq!(isserlis_moment(&[0, 0, 1, 1], &id).unwrap(), 1.0);
        assert_eq!(isserlis_moment(&[2, 2, 2, 2], &id).unwrap(), 3.0);
        assert_eq!(isserlis_moment(&[1; 6], &id).unwrap(), 15.0);
    }

    #[test]
    fn fourth_order_three_term_form() {
        let s = spd3();
        for &(a, b, c, d) in &[(0, 1, 2, 0), (1, 1, 2, 0), (2, 2, 2, 1), (0, 1, 1, 2)] {
            let expected =
                s[(a, b)] * s[(c, d)] + s[(a, c)] * s[(b, d)] + s[(a, d)] * s[(b, c)];
            assert!((isserlis_moment(&[a, b, c, d], &s).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn pair_partition_counts() {
        let expected = [(2, 1), (4, 3), (6, 15), (8, 105), (10, 945), (12, 10395)];
        for (w, n) in expected {
            assert_eq!(pair_partition_count(w).unwrap(), n);
            let idx: Vec<usize> = (0..w).map(|i| i % 3).collect();
            let (_, terms) = isserlis_moment_counted(&idx, &spd3()).unwrap();
            assert_eq!(terms, n);
        }
        assert!(pair_partition_count(5).is_err());
        assert!(pair_partition_count(0).is_err());
    }

    #[test]
    fn odd_and_oversized_orders() {
        assert_eq!(isserlis_moment(&[0, 1, 2], &spd3()).unwrap(), 0.0);
        assert!(matches!(
            isserlis_moment(&[0; 14], &spd3()),
            Err(Error::Unsupported(_))
        ));
        assert!(isserlis_moment(&[0, 5], &spd3()).is_err());
    }

    #[test]
    fn scalar_moments_are_double_factorials() {
        let s = DMatrix::from_element(1, 1, 1.7);
        for w in (2..=12).step_by(2) {
            let expected = pair_partition_count(w).unwrap() as f64 * 1.7f64.powi(w as i32 / 2);
            let got = isserlis_moment(&vec![0; w], &s).unwrap();
            assert!((got - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn table_memoizes_distinct_multisets() {
        let t = MomentTable::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 2.0])).unwrap();
        let m = t.tensor(12).unwrap();
        assert_eq!(t.cached_entries(), 13);
        assert_eq!(m.get(&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1]), t.moment_counts([6, 6, 0]).unwrap());
    }

    #[test]
    fn table_is_shareable_across_threads() {
        let t = std::sync::Arc::new(MomentTable::new(spd3()).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|k| {
                let t = t.clone();
                std::thread::spawn(move || t.moment(&[k % 3, 0, 1, 2, 2, 1]).unwrap())
            })
            .collect();
        for (k, h) in handles.into_iter().enumerate() {
            let direct = isserlis_moment(&[k % 3, 0, 1, 2, 2, 1], &spd3()).unwrap();
            assert!((h.join().unwrap() - direct).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn permutation_invariant(idx in proptest::collection::vec(0usize..3, 2..=8), seed in 0u64..1000) {
            let s = spd3();
            let a = isserlis_moment(&idx, &s).unwrap();
            let mut shuffled = idx.clone();
            let len = shuffled.len();
            shuffled.rotate_left((seed as usize) % len);
            shuffled.swap(0, len - 1);
            let b = isserlis_moment(&shuffled, &s).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn diagonal_odd_multiplicity_vanishes(idx in proptest::collection::vec(0usize..3, 2..=10)) {
            let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 1.3, 2.1]));
            let c = counts_of(&idx);
            let v = isserlis_moment(&idx, &s).unwrap();
            if c.iter().any(|k| k % 2 == 1) {
                prop_assert_eq!(v, 0.0);
            } else {
                prop_assert!(v > 0.0);
            }
        }

        #[test]
        fn odd_orders_vanish(idx in proptest::collection::vec(0usize..3, 1..=11)) {
            prop_assume!(idx.len() % 2 == 1);
            prop_assert_eq!(isserlis_moment(&idx, &spd3()).unwrap(), 0.0);
        }
    }
}
