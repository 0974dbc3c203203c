mod common;

use common::{gauss_density, gauss_expect, mean_se, rng, simpson};
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};
use vopt::gauss::*;

fn g(mean: f64, std: f64) -> ScalarGaussian {
    ScalarGaussian::new(mean, std)
}

#[test]
fn cdf_examples() {
    assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
    assert!((std_normal_cdf(40.0).unwrap() - 1.0).abs() <= 1e-15);
    let quad = simpson(&|x| gauss_density(x, 0.0, 1.0), -12.0, 1.0, 1e-15);
    assert!((std_normal_cdf(1.0).unwrap() - quad).abs() < 1e-13);
    assert!((quad - 0.841_344_746).abs() < 1e-9);
    assert!(std_normal_cdf(f64::NAN).is_err());
    assert!(std_normal_cdf(f64::INFINITY).is_err());
}

#[test]
fn abs_mean_examples() {
    assert!((abs_gauss_mean(g(0.0, 1.0)).unwrap() - SQRT_2_OVER_PI).abs() < 1e-15);
    assert!((abs_gauss_mean(g(2.0, 1e-8)).unwrap() - 2.0).abs() < 1e-12);
    let quad = gauss_expect(f64::abs, 1.0, 1.0);
    let v = abs_gauss_mean(g(1.0, 1.0)).unwrap();
    assert!((v - quad).abs() < 1e-12);
    assert!((v - 1.166_630_941_175_373).abs() < 1e-12);
    assert!(abs_gauss_mean(g(1.0, 0.0)).is_err());
    assert!(abs_gauss_mean(g(1.0, -1.0)).is_err());
}

#[test]
fn abs_grad_examples() {
    assert_eq!(abs_gauss_grad_mu(g(0.0, 1.0)).unwrap(), 0.0);
    assert!((abs_gauss_grad_mu(g(5.0, 0.1)).unwrap() - 1.0).abs() < 1e-12);
    let h = 1e-6;
    let fd = (abs_gauss_mean(g(1.0 + h, 1.0)).unwrap() - abs_gauss_mean(g(1.0 - h, 1.0)).unwrap())
        / (2.0 * h);
    let v = abs_gauss_grad_mu(g(1.0, 1.0)).unwrap();
    assert!((v - fd).abs() < 1e-8);
    assert!((v - 0.682_689).abs() < 1e-6);
    assert!(abs_gauss_grad_mu(g(0.0, 0.0)).is_err());
}

#[test]
fn hinge_mean_examples() {
    assert!((hinge_gauss_mean(0.0, 1.0).unwrap() - INV_SQRT_2PI).abs() < 1e-15);
    assert!(hinge_gauss_mean(-3.0, 1e-8).unwrap().abs() < 1e-12);
    let quad = gauss_expect(|z| z.max(0.0), 1.0, 1.0);
    let v = hinge_gauss_mean(1.0, 1.0).unwrap();
    assert!((v - quad).abs() < 1e-12);
    assert!((v - 1.083_315).abs() < 1e-6);
    assert!(hinge_gauss_mean(1.0, 0.0).is_err());
}

#[test]
fn abs_gap_examples() {
    assert!((abs_gap(0.0).unwrap() - 2.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    assert!(abs_gap(8.0).unwrap() < 1e-10);
    let quad = gauss_expect(f64::abs, 1.0, 1.0) - 1.0;
    let v = abs_gap(1.0).unwrap();
    assert!((v - quad).abs() < 1e-12);
    assert!((v - 0.166_630_941_175_373).abs() < 1e-12);
    assert!(abs_gap(f64::NAN).is_err());
}

#[test]
fn step_expectation() {
    for theta in [-1.0f64, 0.0, 1.0] {
        let quad = simpson(&|x| gauss_density(x, theta, 1.0), 0.0, theta + 12.0, 1e-15);
        assert!((step_gauss_mean(theta).unwrap() - quad).abs() < 1e-12);
        let want = (-0.5 * theta * theta).exp() * INV_SQRT_2PI;
        assert!((step_gauss_grad(theta).unwrap() - want).abs() < 1e-15);
    }
}

#[test]
fn abs_mean_matches_monte_carlo() {
    let mut r = rng(5);
    for (mean, std) in [(0.3f64, 1.2f64), (-2.0, 0.7), (0.0, 3.0), (4.0, 1.0)] {
        let dist = Normal::new(mean, std).unwrap();
        let samples: Vec<f64> = (0..1_000_000).map(|_| dist.sample(&mut r).abs()).collect();
        let (m, se) = mean_se(&samples);
        let exact = abs_gauss_mean(g(mean, std)).unwrap();
        assert!(
            (m - exact).abs() < 4.0 * se,
            "({mean}, {std}): {m} vs {exact} ± {se}"
        );
    }
}

proptest! {
    #[test]
    fn cdf_symmetry_and_monotone(x in -38.0f64..38.0, dx in 0.0f64..5.0) {
        let p = std_normal_cdf(x).unwrap();
        prop_assert!((p + std_normal_cdf(-x).unwrap() - 1.0).abs() <= 1e-15);
        prop_assert!(std_normal_cdf(x + dx).unwrap() >= p);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn abs_mean_rearrangement(mu in -50.0f64..50.0, sigma in 1e-3f64..20.0) {
        let lhs = abs_gauss_mean(g(mu, sigma)).unwrap() - mu.abs();
        let rhs = sigma * abs_gap(mu / sigma).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300) + 1e-13 * mu.abs().max(1.0));
        prop_assert!(lhs >= 0.0);
        prop_assert_eq!(abs_gauss_mean(g(-mu, sigma)).unwrap(), abs_gauss_mean(g(mu, sigma)).unwrap());
    }

    #[test]
    fn abs_derivatives_match_differences(mu in -10.0f64..10.0, sigma in 0.05f64..5.0) {
        let h = 1e-6 * mu.abs().max(1.0);
        let f = |m: f64| abs_gauss_mean(g(m, sigma)).unwrap();
        let d1 = abs_gauss_grad_mu(g(mu, sigma)).unwrap();
        let fd1 = (f(mu + h) - f(mu - h)) / (2.0 * h);
        prop_assert!((d1 - fd1).abs() <= 1e-6 * d1.abs().max(1.0));
        prop_assert!(d1 > -1.0 && d1 < 1.0 || (d1.abs() == 1.0 && mu.abs() / sigma > 8.0));
        prop_assert_eq!(abs_gauss_grad_mu(g(-mu, sigma)).unwrap(), -d1);
        let fp = |m: f64| abs_gauss_grad_mu(g(m, sigma)).unwrap();
        let d2 = abs_gauss_hess_mu(g(mu, sigma)).unwrap();
        let fd2 = (fp(mu + h) - fp(mu - h)) / (2.0 * h);
        prop_assert!((d2 - fd2).abs() <= 1e-6 * d2.abs().max(1.0));
    }

    #[test]
    fn hinge_mean_properties(nu in -20.0f64..20.0, vs in 1e-3f64..10.0) {
        let v = hinge_gauss_mean(nu, vs).unwrap();
        prop_assert!(v >= nu.max(0.0));
        prop_assert!(v - nu.max(0.0) <= vs * INV_SQRT_2PI * (1.0 + 1e-14));
        let h = 1e-6 * nu.abs().max(1.0);
        let fd = (hinge_gauss_mean(nu + h, vs).unwrap() - hinge_gauss_mean(nu - h, vs).unwrap()) / (2.0 * h);
        let d = hinge_gauss_grad_nu(nu, vs).unwrap();
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0));
        // convex and nondecreasing
        prop_assert!(d >= 0.0);
        let mid = hinge_gauss_mean(nu + 0.5, vs).unwrap();
        prop_assert!(mid <= 0.5 * (v + hinge_gauss_mean(nu + 1.0, vs).unwrap()) + 1e-12);
    }

    #[test]
    fn abs_gap_shape(z in -30.0f64..30.0) {
        let v = abs_gap(z).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!(v <= abs_gap(0.0).unwrap());
        prop_assert_eq!(v, abs_gap(-z).unwrap());
    }
}
