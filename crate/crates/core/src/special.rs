//! Standard normal helpers.

use statrs::function::erf;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

/// `sqrt(2/π)`, the mean absolute value of a standard normal.
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn normal_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    -SQRT_2 * erf::erfc_inv(2.0 * u)
}

/// Scaled tail `e^{x²/2}(1 − Φ(x))` for `x ≥ 0`.
///
/// The direct product is accurate until `e^{x²/2}` nears overflow; past
/// `x = 26` the asymptotic Mills-ratio series is exact to double precision.
pub fn scaled_normal_tail(x: f64) -> f64 {
    if x <= 26.0 {
        return normal_sf(x) * (0.5 * x * x).exp();
    }
    let inv2 = 1.0 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=16 {
        term *= -((2 * k - 1) as f64) * inv2;
        sum += term;
    }
    sum / (x * (2.0 * PI).sqrt())
}
