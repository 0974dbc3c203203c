#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use vopt::lasso::{build_quadratic, LassoSpec};
use vopt::svm::{build_kernel, Kernel, KernelProblem};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_vec(len: usize, scale: f64, rng: &mut ChaCha20Rng) -> DVector<f64> {
    DVector::from_fn(len, |_, _| scale * normal(rng))
}

/// Adaptive Simpson integration of `f` over [a, b].
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

pub fn gauss_density(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
}

/// E[g(w)] for w ~ N(mean, std²) by quadrature over ±12 std, split at the
/// kink at 0 so the integrand is smooth on each piece.
pub fn gauss_expect<G: Fn(f64) -> f64>(g: G, mean: f64, std: f64) -> f64 {
    let (lo, hi) = (mean - 12.0 * std, mean + 12.0 * std);
    let f = |x: f64| g(x) * gauss_density(x, mean, std);
    if lo < 0.0 && hi > 0.0 {
        simpson(&f, lo, 0.0, 1e-14) + simpson(&f, 0.0, hi, 1e-14)
    } else {
        simpson(&f, lo, hi, 1e-14)
    }
}

/// Central-difference gradient with step 1e-6·max(1, |xᵢ|).
pub fn fd_grad<F: Fn(&DVector<f64>) -> f64>(f: F, x: &DVector<f64>) -> DVector<f64> {
    let mut probe = x.clone();
    DVector::from_fn(x.len(), |i, _| {
        let h = 1e-6 * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        (up - down) / (2.0 * h)
    })
}

/// ‖a − b‖∞ / max(1, ‖b‖∞).
pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

/// Random regression data turned into a lasso spec.
pub fn random_lasso(dim: usize, n: usize, l1: f64, l2: f64, rng: &mut ChaCha20Rng) -> LassoSpec {
    let x = DMatrix::from_fn(n, dim, |_, _| normal(rng));
    let y = DVector::from_fn(n, |_, _| 3.0 * normal(rng));
    LassoSpec::new(build_quadratic(&x, &y).unwrap(), l1, l2).unwrap()
}

/// Random linear-kernel problem with roughly balanced labels.
pub fn random_svm(n: usize, dim: usize, cost: f64, rng: &mut ChaCha20Rng) -> KernelProblem {
    let labels = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
    let pts = DMatrix::from_fn(n, dim, |i, _| 0.5 * labels[i] + normal(rng));
    build_kernel(&pts, &labels, Kernel::Linear, cost).unwrap()
}

/// Mean and standard error of a sample.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Binary program with standard normal entries; A is symmetrized when asked.
pub fn random_qp(dim: usize, symmetric: bool, rng: &mut ChaCha20Rng) -> vopt::binary::BinaryQP {
    let mut a = DMatrix::from_fn(dim, dim, |_, _| normal(rng));
    if symmetric {
        a = (&a + a.transpose()) * 0.5;
    }
    let b = normal_vec(dim, 1.0, rng);
    vopt::binary::BinaryQP::new(a, b).unwrap()
}

/// Bits of `mask`, lowest bit as x₁.
pub fn bits(mask: u64, dim: usize) -> Vec<bool> {
    (0..dim).map(|i| mask >> i & 1 == 1).collect()
}

/// xᵀAx + bᵀx by matrix products.
pub fn naive_f(qp: &vopt::binary::BinaryQP, x: &[bool]) -> f64 {
    let v = DVector::from_iterator(x.len(), x.iter().map(|&b| if b { 1.0 } else { 0.0 }));
    (v.transpose() * qp.a() * &v)[0] + qp.b().dot(&v)
}

/// Exhaustive maximum over all vertices.
pub fn naive_max(qp: &vopt::binary::BinaryQP) -> f64 {
    let d = qp.dim();
    (0..1u64 << d)
        .map(|m| naive_f(qp, &bits(m, d)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// E[f(x)] for independent xᵢ ~ Bernoulli(θᵢ), summed over every vertex.
pub fn bernoulli_expectation(qp: &vopt::binary::BinaryQP, theta: &DVector<f64>) -> f64 {
    let d = qp.dim();
    (0..1u64 << d)
        .map(|m| {
            let x = bits(m, d);
            let p: f64 = x
                .iter()
                .zip(theta.iter())
                .map(|(&xi, &t)| if xi { t } else { 1.0 - t })
                .product();
            p * naive_f(qp, &x)
        })
        .sum()
}
