//! Monte Carlo prior-predictive checks of the quadrature marginals.
//!
//! The oracle never evaluates a noncentral-t density. With δ drawn from the
//! prior and V ~ χ²(ν), the density of t = (Z + λ)/√(V/ν) at t is the mean
//! of φ(t√(V/ν) − λ)·√(V/ν) with λ = √n_eff·δ.

use perinull::bf::marginal_loglik;
use perinull::quadrature::QuadratureConfig;
use perinull::types::{IntervalRegion, PriorSpec, SummaryStats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, ChiSquared, Distribution, Normal};

const DRAWS: usize = 100_000;

fn draw_delta(prior: &PriorSpec, rng: &mut ChaCha8Rng) -> f64 {
    match *prior {
        PriorSpec::PointAtZero => 0.0,
        PriorSpec::PeriNullNormal { kappa0 } => Normal::new(0.0, kappa0).unwrap().sample(rng),
        PriorSpec::AltCauchy { kappa1 } => Cauchy::new(0.0, kappa1).unwrap().sample(rng),
        PriorSpec::TruncatedCauchy { kappa_e, a, region } => {
            let c = Cauchy::new(0.0, kappa_e).unwrap();
            loop {
                let d: f64 = c.sample(rng);
                let inside = d.abs() <= a;
                if inside == (region == IntervalRegion::Inside) {
                    return d;
                }
            }
        }
        PriorSpec::PeriPointMixture { xi, kappa0 } => {
            if rng.random::<f64>() < xi {
                0.0
            } else {
                Normal::new(0.0, kappa0).unwrap().sample(rng)
            }
        }
        PriorSpec::ShrinkingPeriNull { .. } => unreachable!(),
    }
}

/// Estimate of the prior-predictive density and its standard error.
fn mc_marginal(stats: &SummaryStats, prior: &PriorSpec, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = ChiSquared::new(stats.nu).unwrap();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..DRAWS {
        let lambda = stats.n_eff.sqrt() * draw_delta(prior, &mut rng);
        let s = (chi.sample(&mut rng) / stats.nu).sqrt();
        let z = stats.t * s - lambda;
        let f = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt() * s;
        sum += f;
        sum_sq += f * f;
    }
    let n = DRAWS as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check(stats: &SummaryStats, prior: &PriorSpec, seed: u64, k: f64) {
    let quad = marginal_loglik(stats, prior, &QuadratureConfig::default()).unwrap().log_value.exp();
    let (mc, se) = mc_marginal(stats, prior, seed);
    assert!(
        (quad - mc).abs() <= k * se,
        "{prior:?} t={} nu={}: quadrature {quad}, Monte Carlo {mc} ± {se}",
        stats.t,
        stats.nu
    );
}

#[test]
fn marginals_match_monte_carlo_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..20u64 {
        let two_sample = rng.random::<bool>();
        let stats = if two_sample {
            SummaryStats::two_sample(rng.random_range(-3.0..3.0), rng.random_range(5..80), rng.random_range(5..80))
        } else {
            let n: u64 = rng.random_range(5..200);
            SummaryStats::new(rng.random_range(-3.0..3.0), (n - 1) as f64, n as f64, perinull::types::Design::OneSample, n)
        }
        .unwrap();
        let kappa = rng.random_range(0.05..1.5);
        let a = rng.random_range(0.05..0.5);
        let prior = match i % 6 {
            0 => PriorSpec::PointAtZero,
            1 => PriorSpec::PeriNullNormal { kappa0: kappa },
            2 => PriorSpec::AltCauchy { kappa1: kappa },
            3 => PriorSpec::TruncatedCauchy { kappa_e: kappa, a, region: IntervalRegion::Inside },
            4 => PriorSpec::TruncatedCauchy { kappa_e: kappa, a, region: IntervalRegion::Outside },
            _ => PriorSpec::PeriPointMixture { xi: rng.random_range(0.1..0.9), kappa0: kappa },
        };
        check(&stats, &prior, 100 + i, 4.0);
    }
}

#[test]
fn interval_marginals_at_zero_t() {
    let stats = SummaryStats::new(0.0, 99.0, 100.0, perinull::types::Design::OneSample, 100).unwrap();
    for region in [IntervalRegion::Inside, IntervalRegion::Outside] {
        let prior = PriorSpec::TruncatedCauchy { kappa_e: std::f64::consts::FRAC_1_SQRT_2, a: 0.5, region };
        check(&stats, &prior, 7, 3.0);
    }
}
