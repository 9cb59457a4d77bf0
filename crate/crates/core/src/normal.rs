//! Standard normal distribution function and quantile. Φ goes through the
//! musl-derived `erfc` of `libm`; the quantile starts from `erfc_inv` and is
//! polished by Newton steps against Φ.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

/// Φ(x), accurate in both tails through the complementary error function.
pub fn cdf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// 1 - Φ(x) without cancellation.
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Φ⁻¹(p) for `0 < p < 1`; NaN outside, ±∞ at the endpoints.
pub fn quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    // Newton polishing against the forward function.
    for _ in 0..3 {
        let density = pdf(x);
        if density <= 0.0 {
            break;
        }
        let step = (cdf(x) - p) / density;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}
