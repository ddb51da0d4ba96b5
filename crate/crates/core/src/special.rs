//! Standard normal helpers that stay finite deep in the tails.

use statrs::function::erf::erfc;

/// `ln(2π) / 2`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const LOG_CDF_SERIES_BELOW: f64 = -30.0;
const MILLS_SERIES_BELOW: f64 = -30.0;

/// Log density of the standard normal.
#[inline]
pub fn log_phi(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal density.
#[inline]
pub fn phi(x: f64) -> f64 {
    log_phi(x).exp()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `ln Φ(x)` without forming `Φ(x)` where it would underflow.
///
/// Uses the complementary error function on the bulk of the line and the
/// Laplace continued-fraction series below `-30`.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x > 5.0 {
        (-0.5 * erfc(x / std::f64::consts::SQRT_2)).ln_1p()
    } else if x >= LOG_CDF_SERIES_BELOW {
        (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
    } else {
        let a = 1.0 / (x * x);
        let series = 1.0 - a * (1.0 - a * (3.0 - a * (15.0 - a * (105.0 - a * 945.0))));
        log_phi(x) - (-x).ln() + series.ln()
    }
}

/// Inverse Mills ratio `φ(u) / Φ(u)`.
///
/// Below `-30` the leading terms of the asymptotic expansion
/// `-u - 1/u + 2/u³` replace the ratio, which would otherwise be `0/0`.
pub fn inv_mills(u: f64) -> f64 {
    if u < MILLS_SERIES_BELOW {
        let inv = 1.0 / u;
        -u - inv + 2.0 * inv * inv * inv
    } else {
        (log_phi(u) - log_norm_cdf(u)).exp()
    }
}
