use nalgebra::DMatrix;
use perinull::laplace::isserlis_moment;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn order_eight_moment_matches_monte_carlo() {
    let cov = DMatrix::from_row_slice(2, 2, &[1.3, 0.6, 0.6, 0.8]);
    let l = cov.clone().cholesky().unwrap().l();
    let idx = [0, 0, 0, 1, 1, 1, 1, 1];
    let exact = isserlis_moment(&idx, &cov).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 10_000_000usize;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..draws {
        let z0: f64 = StandardNormal.sample(&mut rng);
        let z1: f64 = StandardNormal.sample(&mut rng);
        let x0 = l[(0, 0)] * z0;
        let x1 = l[(1, 0)] * z0 + l[(1, 1)] * z1;
        let v = x0.powi(3) * x1.powi(5);
        sum += v;
        sum_sq += v * v;
    }
    let n = draws as f64;
    let mean = sum / n;
    let se = ((sum_sq / n - mean * mean) / (n - 1.0)).sqrt();
    assert!((exact - mean).abs() <= 4.0 * se, "exact {exact}, Monte Carlo {mean} ± {se}");
}
