use perinull::bf::marginal_loglik;
use perinull::laplace::models::{
    expand_model, BetaBernoulli, ConjugateGaussian, DerivativeSource, EffectPrior, GammaKernel,
    LaplaceModel, TTestModel,
};
use perinull::quadrature::QuadratureConfig;
use perinull::ingest::ingest_one_sample;
use perinull::types::PriorSpec;

fn conjugate(n: u64) -> ConjugateGaussian {
    ConjugateGaussian::new(n, 0.3, 1.1, 1.0, 0.0, 20.0).unwrap()
}

#[test]
fn conjugate_gaussian_second_order_is_exact() {
    for n in [10, 15, 20, 50, 100, 1000, 100_000] {
        let m = conjugate(n);
        let r = expand_model(&m, DerivativeSource::Analytic).unwrap();
        let exact = m.exact_log_marginal().unwrap();
        let err = (r.with_c2.unwrap() - exact).abs();
        assert!(err < 1e-10, "n={n}: {err:e}");
    }
}

#[test]
fn conjugate_gaussian_truncations_improve() {
    for n in 20..=200 {
        let m = ConjugateGaussian::new(n, 0.8, 1.0, 1.5, -0.5, 0.7).unwrap();
        let r = expand_model(&m, DerivativeSource::Analytic).unwrap();
        let exact = m.exact_log_marginal().unwrap();
        let e0 = (r.leading - exact).abs();
        let e1 = (r.with_c1.unwrap() - exact).abs();
        let e2 = (r.with_c2.unwrap() - exact).abs();
        assert!(e2 <= e1 && e1 <= e0, "n={n}: {e0:e} {e1:e} {e2:e}");
    }
}

#[test]
fn beta_bernoulli_truncations_strictly_improve() {
    let m = BetaBernoulli::new(50, 20, 2.0, 2.0).unwrap();
    let r = expand_model(&m, DerivativeSource::Analytic).unwrap();
    let exact = m.exact_log_marginal().unwrap();
    let e0 = (r.leading - exact).abs();
    let e1 = (r.with_c1.unwrap() - exact).abs();
    let e2 = (r.with_c2.unwrap() - exact).abs();
    assert!(e2 < e1 && e1 < e0, "{e0:e} {e1:e} {e2:e}");
}

/// Fits R(n) = exact/leading against 1 + C1/n + C2/n² + C3/n³ + C4/n⁴ at
/// five sample sizes.
fn extrapolated_constants(model: impl Fn(u64) -> GammaKernel) -> (f64, f64) {
    let ns = [100u64, 141, 200, 283, 400];
    let mut a = nalgebra::DMatrix::<f64>::zeros(5, 4);
    let mut b = nalgebra::DVector::<f64>::zeros(5);
    for (i, &n) in ns.iter().enumerate() {
        let m = model(n);
        let r = expand_model(&m, DerivativeSource::Analytic).unwrap();
        let nf = n as f64;
        // n·(R − 1) = C1 + C2/n + C3/n² + C4/n³
        b[i] = nf * (m.exact_log_marginal().unwrap() - r.leading).exp_m1();
        for j in 0..4 {
            a[(i, j)] = nf.powi(-(j as i32));
        }
    }
    let x = a.svd(true, true).solve(&b, 1e-14).unwrap();
    (x[0], x[1])
}

#[test]
fn gamma_kernel_constants_match_extrapolation() {
    let m = GammaKernel { n: 100 };
    let r = expand_model(&m, DerivativeSource::Analytic).unwrap();
    let (c1, c2) = extrapolated_constants(|n| GammaKernel { n });
    assert!((r.c1 - c1).abs() < 0.01 * c1.abs(), "{} vs {c1}", r.c1);
    assert!((r.c2 - c2).abs() < 0.05 * c2.abs(), "{} vs {c2}", r.c2);
}

#[test]
fn finite_difference_fallback_on_ttest_peri() {
    let m = TTestModel::at_mle(500, 0.0, 1.0, EffectPrior::Normal { kappa: 0.05 }).unwrap();
    let r = expand_model(&m, DerivativeSource::FiniteDifference).unwrap();
    assert!((r.c1 + 199.83).abs() < 5.0, "{}", r.c1);
}

/// The t-test models and the t-statistic engine differ only by a Jacobian
/// common to all hypotheses, so log ratios against the point null agree.
#[test]
fn ttest_laplace_matches_quadrature() {
    let cfg = QuadratureConfig::default();
    let n = 500u64;
    for &(mean, var, prior) in &[
        (0.02, 1.0, EffectPrior::Normal { kappa: 0.5 }),
        (0.05, 0.9, EffectPrior::Normal { kappa: 0.3 }),
        (0.1, 1.2, EffectPrior::Cauchy { kappa: 0.7 }),
    ] {
        let m = TTestModel::new(n, mean, var, prior).unwrap();
        let laplace = expand_model(&m, DerivativeSource::Analytic).unwrap();
        let point = m.point_null_log_marginal();
        let s = ingest_one_sample(m.t_statistic(), n).unwrap();
        let spec = match prior {
            EffectPrior::Normal { kappa } => PriorSpec::PeriNullNormal { kappa0: kappa },
            EffectPrior::Cauchy { kappa } => PriorSpec::AltCauchy { kappa1: kappa },
        };
        let quad = marginal_loglik(&s, &spec, &cfg).unwrap().log_value
            - marginal_loglik(&s, &PriorSpec::PointAtZero, &cfg).unwrap().log_value;
        let exact = m.exact_log_marginal().unwrap() - point;
        assert!((exact - quad).abs() < 1e-7, "exact {exact} vs quadrature {quad}");
        let approx = laplace.with_c2.unwrap() - point;
        assert!((approx - quad).abs() < 1e-3, "{prior:?}: laplace {approx} vs quadrature {quad}");
    }
}
