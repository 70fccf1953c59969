//! Conversion of reported data into the canonical t-test summary.

use crate::error::{invalid, Result};
use crate::types::{Design, SummaryStats};

/// Equal-variance (pooled) two-sample t-test from group means, standard
/// deviations and sizes. `t` carries the sign of `mean1 - mean2`.
pub fn ingest_two_sample(
    mean1: f64,
    sd1: f64,
    n1: u64,
    mean2: f64,
    sd2: f64,
    n2: u64,
) -> Result<SummaryStats> {
    if !(sd1 > 0.0 && sd1.is_finite() && sd2 > 0.0 && sd2.is_finite()) {
        return invalid(format!("standard deviations must be positive, got {sd1} and {sd2}"));
    }
    if !(mean1.is_finite() && mean2.is_finite()) {
        return invalid("group means must be finite");
    }
    if n1 < 2 || n2 < 2 {
        return invalid(format!("group sizes must be at least 2, got {n1} and {n2}"));
    }
    let (f1, f2) = (n1 as f64, n2 as f64);
    let nu = f1 + f2 - 2.0;
    let pooled_var = ((f1 - 1.0) * sd1 * sd1 + (f2 - 1.0) * sd2 * sd2) / nu;
    let n_eff = f1 * f2 / (f1 + f2);
    // se = sp * sqrt(1/n1 + 1/n2) = sp / sqrt(n_eff)
    let t = (mean1 - mean2) * n_eff.sqrt() / pooled_var.sqrt();
    SummaryStats::new(t, nu, n_eff, Design::TwoSample, n1 + n2)
}

/// One-sample summary from a reported t and sample size.
pub fn ingest_one_sample(t: f64, n: u64) -> Result<SummaryStats> {
    if n < 2 {
        return invalid(format!("sample size must be at least 2, got {n}"));
    }
    SummaryStats::new(t, (n - 1) as f64, n as f64, Design::OneSample, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thirst_study_summary() {
        let s = ingest_two_sample(25.1, 7.3, 47, 28.0, 6.2, 43).unwrap();
        assert!(s.t < 0.0);
        assert_eq!((s.t.abs() * 10.0).round() / 10.0, 2.0);
        assert_eq!(s.nu, 88.0);
        assert!((s.n_eff - 22.456).abs() < 1e-3);
        assert_eq!(s.n_total, 90);
        assert_eq!(s.design, Design::TwoSample);
    }

    #[test]
    fn identical_means_give_zero() {
        let s = ingest_two_sample(0.0, 1.0, 10, 0.0, 1.0, 10).unwrap();
        assert_eq!(s.t, 0.0);
        assert_eq!(s.nu, 18.0);
        assert_eq!(s.n_eff, 5.0);
    }

    #[test]
    fn pooled_formula_brute_force() {
        // textbook form: (m1 - m2) / sqrt(sp^2 (1/n1 + 1/n2))
        let s = ingest_two_sample(1.0, 1.0, 5, 0.0, 1.0, 5).unwrap();
        let sp2: f64 = (4.0 * 1.0 + 4.0 * 1.0) / 8.0;
        let expected = 1.0 / (sp2 * (1.0 / 5.0 + 1.0 / 5.0)).sqrt();
        assert!((s.t - expected).abs() < 1e-14);
        assert!((s.t - 1.5811388300841898).abs() < 1e-14);
    }

    #[test]
    fn two_sample_errors() {
        assert!(ingest_two_sample(0.0, 0.0, 5, 0.0, 1.0, 5).is_err());
        assert!(ingest_two_sample(0.0, 1.0, 5, 0.0, -1.0, 5).is_err());
        assert!(ingest_two_sample(0.0, 1.0, 1, 0.0, 1.0, 5).is_err());
    }

    #[test]
    fn one_sample_examples() {
        let s = ingest_one_sample(2.0, 100).unwrap();
        assert_eq!((s.t, s.nu, s.n_eff), (2.0, 99.0, 100.0));
        let s = ingest_one_sample(0.0, 2).unwrap();
        assert_eq!((s.t, s.nu, s.n_eff), (0.0, 1.0, 2.0));
        let s = ingest_one_sample(-3.5, 50).unwrap();
        assert_eq!((s.t, s.nu, s.n_eff), (-3.5, 49.0, 50.0));
        assert_eq!(s.design, Design::OneSample);
        assert!(ingest_one_sample(1.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn swapping_groups_negates_t(
            m1 in -50.0..50.0f64, m2 in -50.0..50.0f64,
            s1 in 0.1..20.0f64, s2 in 0.1..20.0f64,
            n1 in 2u64..500, n2 in 2u64..500,
        ) {
            let a = ingest_two_sample(m1, s1, n1, m2, s2, n2).unwrap();
            let b = ingest_two_sample(m2, s2, n2, m1, s1, n1).unwrap();
            prop_assert!((a.t + b.t).abs() <= 1e-12 * a.t.abs().max(1.0));
            prop_assert_eq!(a.nu, b.nu);
            prop_assert!((a.n_eff - b.n_eff).abs() <= 1e-12 * a.n_eff);
            prop_assert!(a.n_eff <= n1.min(n2) as f64);
        }

        #[test]
        fn equal_means_zero_t(m in -50.0..50.0f64, s1 in 0.1..20.0f64, s2 in 0.1..20.0f64,
                              n1 in 2u64..500, n2 in 2u64..500) {
            let a = ingest_two_sample(m, s1, n1, m, s2, n2).unwrap();
            prop_assert_eq!(a.t, 0.0);
        }
    }
}
