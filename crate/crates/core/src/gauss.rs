//! Scalar Gaussian expectations shared by every smoothed objective.
//!
//! All functions are pure. The checked variants validate their inputs and
//! return [`VoError::Domain`]; the `pub(crate)` kernels skip validation and
//! are used on hot paths where the caller already owns the invariants.

use crate::error::{domain, Result, VoError};

/// 1/√(2π)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_94;
/// √(2/π), the peak of [`abs_gap`].
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_355_88;

/// Beyond this |z| the Gaussian density underflows for all practical purposes.
const PDF_CUTOFF: f64 = 40.0;

/// A univariate Gaussian described by mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarGaussian {
    pub mean: f64,
    pub std: f64,
}

impl ScalarGaussian {
    pub fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }

    fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return domain(format!("gaussian mean must be finite, got {}", self.mean));
        }
        if !(self.std > 0.0) || !self.std.is_finite() {
            return domain(format!("gaussian std must be positive, got {}", self.std));
        }
        Ok(())
    }
}

// Cody's rational Chebyshev approximations for the normal integral
// (ACM TOMS 715), evaluated so both tails keep full relative accuracy.
const A: [f64; 5] = [
    2.235_252_035_460_683_928_7,
    161.028_231_068_555_878_81,
    1_067.689_485_460_370_958_2,
    18_154.981_253_343_561_249,
    0.065_682_337_918_207_449_113,
];
const B: [f64; 4] = [
    47.202_581_904_688_241_87,
    976.098_551_737_776_693_22,
    10_260.932_208_618_978_205,
    45_507.789_335_026_729_956,
];
const C: [f64; 9] = [
    0.398_941_512_088_134_667_64,
    8.883_149_794_388_375_941_2,
    93.506_656_132_177_855_979,
    597.270_276_394_800_262_26,
    2_494.537_585_290_372_671_1,
    6_848.190_450_536_282_332_6,
    11_602.651_437_647_350_124,
    9_842.714_838_383_978_021_8,
    1.076_557_677_372_019_231_7e-8,
];
const D: [f64; 8] = [
    22.266_688_044_328_115_691,
    235.387_901_782_624_998_61,
    1_519.377_599_407_554_805,
    6_485.558_298_266_760_755,
    18_615.571_640_885_098_091,
    34_900.952_721_145_977_266,
    38_912.003_286_093_271_411,
    19_685.429_676_859_990_727,
];
const P: [f64; 6] = [
    0.215_898_534_057_956_99,
    0.127_401_161_160_247_363_9,
    0.022_235_277_870_649_807,
    0.001_421_619_193_227_893_466,
    2.911_287_495_116_879_2e-5,
    0.023_073_441_764_940_173_03,
];
const Q: [f64; 5] = [
    1.284_260_096_144_911_21,
    0.468_238_212_480_865_118,
    0.065_988_137_868_928_551_5,
    0.003_782_396_332_027_582_44,
    7.297_515_550_839_662_05e-5,
];

/// exp(-x²/2) evaluated with x² split so the product keeps full precision.
fn split_gauss_exp(x: f64, scale: f64) -> f64 {
    let xsq = (x * 16.0).trunc() / 16.0;
    let del = (x - xsq) * (x + xsq);
    (-xsq * xsq * 0.5).exp() * (-del * 0.5).exp() * scale
}

/// Returns (Φ(x), 1 − Φ(x)), each with full relative accuracy.
pub(crate) fn cdf_both(x: f64) -> (f64, f64) {
    let y = x.abs();
    if y <= 0.674_489_75 {
        let (xnum, xden) = if y > f64::EPSILON * 0.5 {
            let xsq = x * x;
            let mut xnum = A[4] * xsq;
            let mut xden = xsq;
            for i in 0..3 {
                xnum = (xnum + A[i]) * xsq;
                xden = (xden + B[i]) * xsq;
            }
            (xnum, xden)
        } else {
            (0.0, 0.0)
        };
        let temp = x * (xnum + A[3]) / (xden + B[3]);
        return (0.5 + temp, 0.5 - temp);
    }
    let tail = if y <= 32f64.sqrt() {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        split_gauss_exp(y, (xnum + C[7]) / (xden + D[7]))
    } else if y < 37.5193 {
        let xsq = 1.0 / (x * x);
        let mut xnum = P[5] * xsq;
        let mut xden = xsq;
        for i in 0..4 {
            xnum = (xnum + P[i]) * xsq;
            xden = (xden + Q[i]) * xsq;
        }
        let temp = xsq * (xnum + P[4]) / (xden + Q[4]);
        split_gauss_exp(y, (INV_SQRT_2PI - temp) / y)
    } else {
        0.0
    };
    if x > 0.0 {
        (1.0 - tail, tail)
    } else {
        (tail, 1.0 - tail)
    }
}

#[inline]
pub(crate) fn cdf(x: f64) -> f64 {
    cdf_both(x).0
}

#[inline]
pub(crate) fn pdf(x: f64) -> f64 {
    let t = x.abs();
    if t > PDF_CUTOFF {
        0.0
    } else {
        split_gauss_exp(t, INV_SQRT_2PI)
    }
}

/// pdf(z) − |z|·(1 − Φ(|z|)), i.e. the excess of ⟨max(w,0)⟩ over max(μ,0)
/// for w ~ N(z, 1). Never negative.
#[inline]
pub(crate) fn half_gap(z: f64) -> f64 {
    let t = z.abs();
    if t > PDF_CUTOFF {
        return 0.0;
    }
    let upper = cdf_both(t).1;
    (pdf(t) - t * upper).max(0.0)
}

#[inline]
pub(crate) fn abs_mean(mu: f64, sigma: f64) -> f64 {
    mu.abs() + sigma * 2.0 * half_gap(mu / sigma)
}

#[inline]
pub(crate) fn abs_grad(mu: f64, sigma: f64) -> f64 {
    // 1 − 2Φ(−z) written as Φ(z) − Φ(−z) from the two tails
    let (lo, hi) = cdf_both(-mu / sigma);
    hi - lo
}

#[inline]
pub(crate) fn abs_hess(mu: f64, sigma: f64) -> f64 {
    2.0 * pdf(mu / sigma) / sigma
}

#[inline]
pub(crate) fn hinge_mean(nu: f64, varsigma: f64) -> f64 {
    nu.max(0.0) + varsigma * half_gap(nu / varsigma)
}

#[inline]
pub(crate) fn hinge_grad(nu: f64, varsigma: f64) -> f64 {
    cdf(nu / varsigma)
}

/// Standard normal cumulative distribution function Φ(x).
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("normal cdf needs a finite argument, got {x}"));
    }
    Ok(cdf(x))
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("normal pdf needs a finite argument, got {x}"));
    }
    Ok(pdf(x))
}

/// ⟨|w|⟩ for w ~ N(mean, std²):
/// μ(1 − 2Φ(−μ/σ)) + 2σ/√(2π)·exp(−μ²/2σ²).
///
/// Evaluated as |μ| + σ·g(μ/σ) with [`abs_gap`] `g` so the result never
/// drops below |μ| through cancellation.
pub fn abs_gauss_mean(g: ScalarGaussian) -> Result<f64> {
    g.validate()?;
    Ok(abs_mean(g.mean, g.std))
}

/// ∂⟨|w|⟩/∂μ = 1 − 2Φ(−μ/σ).
pub fn abs_gauss_grad_mu(g: ScalarGaussian) -> Result<f64> {
    g.validate()?;
    Ok(abs_grad(g.mean, g.std))
}

/// ∂²⟨|w|⟩/∂μ² = 2/(σ√(2π))·exp(−μ²/2σ²).
pub fn abs_gauss_hess_mu(g: ScalarGaussian) -> Result<f64> {
    g.validate()?;
    Ok(abs_hess(g.mean, g.std))
}

/// ⟨max(z, 0)⟩ for z ~ N(ν, ς²): ν·Φ(ν/ς) + ς/√(2π)·exp(−½(ν/ς)²).
pub fn hinge_gauss_mean(nu: f64, varsigma: f64) -> Result<f64> {
    ScalarGaussian::new(nu, varsigma).validate()?;
    Ok(hinge_mean(nu, varsigma))
}

/// ∂⟨max(z, 0)⟩/∂ν = Φ(ν/ς).
pub fn hinge_gauss_grad_nu(nu: f64, varsigma: f64) -> Result<f64> {
    ScalarGaussian::new(nu, varsigma).validate()?;
    Ok(hinge_grad(nu, varsigma))
}

/// Per-coordinate gap of the smoothed absolute value in standardized units:
/// g(z) = z(1 − 2Φ(−z)) + √(2/π)·exp(−z²/2) − |z|.
///
/// Even, non-negative, peaks at √(2/π) for z = 0 and decays like
/// 2·pdf(z)/z² in the tails.
pub fn abs_gap(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(VoError::Domain(format!(
            "gap needs a finite argument, got {z}"
        )));
    }
    Ok(2.0 * half_gap(z))
}

/// ⟨1[x ≥ 0]⟩ for x ~ N(θ, 1), which is Φ(θ).
pub fn step_gauss_mean(theta: f64) -> Result<f64> {
    std_normal_cdf(theta)
}

/// ∂⟨1[x ≥ 0]⟩/∂θ = exp(−θ²/2)/√(2π). The step function has no derivative at
/// the origin but its Gaussian average is smooth everywhere.
pub fn step_gauss_grad(theta: f64) -> Result<f64> {
    std_normal_pdf(theta)
}
