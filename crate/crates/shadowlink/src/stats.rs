//! Standard-normal density and distribution helpers.
//!
//! The censored likelihood needs `ln Φ(z)` far into the lower tail, where
//! `Φ(z).ln()` underflows. Below the erfc underflow point we switch to the
//! standard asymptotic expansion of the Mills ratio.

/// ln(2π)/2
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal density φ(z).
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z - HALF_LN_2PI).exp()
}

/// ln φ(z).
pub fn ln_norm_pdf(z: f64) -> f64 {
    -0.5 * z * z - HALF_LN_2PI
}

/// Standard normal CDF Φ(z).
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// ln Φ(z), stable over the whole real line.
///
/// erfc stays normal down to z ≈ −37; beyond that we use
/// Φ(z) ≈ φ(z)/(−z) · (1 − 1/z² + 3/z⁴ − 15/z⁶ + 105/z⁸).
pub fn ln_norm_cdf(z: f64) -> f64 {
    if z > -37.0 {
        norm_cdf(z).ln()
    } else {
        let zi2 = 1.0 / (z * z);
        let series = 1.0 + zi2 * (-1.0 + zi2 * (3.0 + zi2 * (-15.0 + zi2 * 105.0)));
        ln_norm_pdf(z) - (-z).ln() + series.ln()
    }
}

/// Sample mean; 0 for empty input.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n−1 denominator); 0 for fewer than 2 values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}
