//! Synthetic problem generators. Every generator draws from a single
//! ChaCha stream seeded by `seed`, in a fixed order, so equal seeds give
//! bit-identical instances.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::lasso::{build_quadratic, LassoSpec};
use crate::svm::{build_kernel, Kernel, KernelProblem};

/// Length of the separation vector between the two SVM classes.
pub const SEPARATION: f64 = 3.5;
pub const SVM_COST: f64 = 10.0;

/// Seed of the instance used for repeat `repeat` of a run seeded with `seed`.
/// Depends only on the pair, so repeats can be generated in any order.
pub fn instance_seed(seed: u64, repeat: u64) -> u64 {
    splitmix(splitmix(seed) ^ repeat.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// 0 with probability ½, otherwise N(±5, 1) with equal odds.
fn sparse_component(rng: &mut ChaCha20Rng) -> f64 {
    let u: f64 = rng.random();
    if u < 0.5 {
        0.0
    } else if u < 0.75 {
        5.0 + normal(rng)
    } else {
        -5.0 + normal(rng)
    }
}

/// Sparse lasso ground truth: each uᵢ is independently 0 (p = ½) or
/// N(±5, 1).
pub fn sparse_truth(dim: usize, rng: &mut ChaCha20Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| sparse_component(rng))
}

/// Piecewise-constant ground truth: u₁ as in [`sparse_truth`], then uᵢ = uᵢ₋₁
/// (p = ½), 0 (p = ¼) or N(±5, 1) (p = ⅛ each).
pub fn chain_truth(dim: usize, rng: &mut ChaCha20Rng) -> DVector<f64> {
    let mut u = DVector::zeros(dim);
    if dim == 0 {
        return u;
    }
    u[0] = sparse_component(rng);
    for i in 1..dim {
        let p: f64 = rng.random();
        u[i] = if p < 0.5 {
            u[i - 1]
        } else if p < 0.75 {
            0.0
        } else if p < 0.875 {
            5.0 + normal(rng)
        } else {
            -5.0 + normal(rng)
        };
    }
    u
}

/// `n` standard normal inputs with noisy linear targets uᵀx + ε, where ε
/// has std 0.1·mean|uᵀx|.
fn regression(u: &DVector<f64>, n: usize, rng: &mut ChaCha20Rng) -> (DMatrix<f64>, DVector<f64>) {
    let dim = u.len();
    let x = DMatrix::from_fn(n, dim, |_, _| normal(rng));
    let clean = &x * u;
    let noise_std = 0.1 * clean.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
    let y = clean.map(|v| v + noise_std * normal(rng));
    (x, y)
}

/// Standard lasso instance with N = 10·dim points and λ₁ = 30·dim.
pub fn gen_lasso(dim: usize, seed: u64) -> Result<(LassoSpec, DVector<f64>)> {
    gen_lasso_sized(dim, 10 * dim, seed)
}

/// [`gen_lasso`] with `n` training points.
pub fn gen_lasso_sized(dim: usize, n: usize, seed: u64) -> Result<(LassoSpec, DVector<f64>)> {
    if dim == 0 || n == 0 {
        return domain(format!(
            "lasso needs dim >= 1 and n >= 1, got dim={dim}, n={n}"
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let u = sparse_truth(dim, &mut rng);
    let (x, y) = regression(&u, n, &mut rng);
    let spec = LassoSpec::new(build_quadratic(&x, &y)?, 30.0 * dim as f64, 0.0)?;
    Ok((spec, u))
}

/// (λ₁, λ₂) = (dim, 0.4·dim), i.e. (500, 200) at dim = 500.
pub fn fused_lambdas(dim: usize) -> (f64, f64) {
    let d = dim as f64;
    (d, 0.4 * d)
}

/// Fused lasso instance with N = 10·dim points and [`fused_lambdas`].
pub fn gen_fused(dim: usize, seed: u64) -> Result<(LassoSpec, DVector<f64>)> {
    gen_fused_sized(dim, 10 * dim, seed)
}

/// [`gen_fused`] with `n` training points.
pub fn gen_fused_sized(dim: usize, n: usize, seed: u64) -> Result<(LassoSpec, DVector<f64>)> {
    if dim < 2 || n == 0 {
        return domain(format!(
            "fused lasso needs dim >= 2 and n >= 1, got dim={dim}, n={n}"
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let u = chain_truth(dim, &mut rng);
    let (x, y) = regression(&u, n, &mut rng);
    let (l1, l2) = fused_lambdas(dim);
    let spec = LassoSpec::new(build_quadratic(&x, &y)?, l1, l2)?;
    Ok((spec, u))
}

/// Raw two-class data behind [`gen_svm`].
#[derive(Debug, Clone, PartialEq)]
pub struct SvmData {
    /// One point per row; positives first.
    pub points: DMatrix<f64>,
    pub labels: DVector<f64>,
    pub separation: DVector<f64>,
}

/// ⌈n/2⌉ positives from N(v, I) and ⌊n/2⌋ negatives from N(0, I), with v a
/// uniformly random direction of length 3.5.
pub fn gen_svm_data(n: usize, dim: usize, seed: u64) -> Result<SvmData> {
    if n < 2 || dim == 0 {
        return domain(format!(
            "svm data needs n >= 2 and dim >= 1, got n={n}, dim={dim}"
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut dir = DVector::from_fn(dim, |_, _| normal(&mut rng));
    while dir.norm() == 0.0 {
        dir = DVector::from_fn(dim, |_, _| normal(&mut rng));
    }
    let separation = dir.normalize() * SEPARATION;
    let positives = n.div_ceil(2);
    let mut points = DMatrix::zeros(n, dim);
    let mut labels = DVector::zeros(n);
    for r in 0..n {
        let positive = r < positives;
        labels[r] = if positive { 1.0 } else { -1.0 };
        for c in 0..dim {
            let shift = if positive { separation[c] } else { 0.0 };
            points[(r, c)] = shift + normal(&mut rng);
        }
    }
    Ok(SvmData {
        points,
        labels,
        separation,
    })
}

/// Linear-kernel problem with C = 10 on [`gen_svm_data`] points.
pub fn gen_svm(n: usize, dim: usize, seed: u64) -> Result<KernelProblem> {
    let data = gen_svm_data(n, dim, seed)?;
    build_kernel(&data.points, &data.labels, Kernel::Linear, SVM_COST)
}

/// Random binary quadratic program: symmetric A and b with standard normal
/// entries.
pub fn gen_binary(dim: usize, seed: u64) -> Result<crate::binary::BinaryQP> {
    if dim == 0 {
        return domain("binary dimension must be at least 1");
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let v = normal(&mut rng);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let b = DVector::from_fn(dim, |_, _| normal(&mut rng));
    crate::binary::BinaryQP::new(a, b)
}
