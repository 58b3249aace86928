//! Standard normal and gamma special functions.
//!
//! `Φ` and `φ` are built on the complementary error function so that both
//! tails keep full relative precision. Products of the form `e^a Φ(z)` with a
//! large exponent are evaluated in log space through the Mills ratio.
//!
//! Only the shape-3/2 gamma law is needed here; it has a closed form in terms
//! of `erf`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Exponent above which `e^a Φ(z)` is evaluated in log space.
const LOG_SPACE_EXPONENT: f64 = 30.0;

/// Standard normal density.
#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

/// Standard normal CDF `Φ(z)`.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(z)`.
#[inline]
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Mills ratio `(1 − Φ(w)) / φ(w)` for `w ≥ 0`, by continued fraction.
pub fn mills_ratio(w: f64) -> f64 {
    debug_assert!(w >= 0.0);
    if w < 5.0 {
        return normal_sf(w) / normal_pdf(w);
    }
    // R(w) = 1/(w + 1/(w + 2/(w + 3/(w + ...)))), modified Lentz.
    let tiny = 1e-300;
    let mut f = w;
    let mut c = w;
    let mut d = 0.0;
    for k in 1..200 {
        let a = k as f64;
        d = w + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = w + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `ln Φ(z)`, accurate far into the lower tail.
pub fn ln_normal_cdf(z: f64) -> f64 {
    if z >= -5.0 {
        if z > 0.0 {
            (-normal_sf(z)).ln_1p()
        } else {
            normal_cdf(z).ln()
        }
    } else {
        -0.5 * z * z - LN_SQRT_2PI + mills_ratio(-z).ln()
    }
}

/// `e^a · Φ(z)` without intermediate overflow.
pub fn exp_times_normal_cdf(a: f64, z: f64) -> f64 {
    if a > LOG_SPACE_EXPONENT {
        (a + ln_normal_cdf(z)).exp()
    } else {
        a.exp() * normal_cdf(z)
    }
}

/// CDF at `x` of the gamma distribution with shape 3/2 and the given rate:
/// `P(3/2, y) = erf(√y) − 2√(y/π) e^{−y}` with `y = rate · x`.
pub fn gamma_three_halves_cdf(x: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let y = rate * x;
    if y > 1.0 {
        1.0 - gamma_three_halves_sf(x, rate)
    } else {
        (libm::erf(y.sqrt()) - 2.0 * (y / PI).sqrt() * (-y).exp()).max(0.0)
    }
}

/// Upper tail of the same law: `Q(3/2, y) = erfc(√y) + 2√(y/π) e^{−y}`.
pub fn gamma_three_halves_sf(x: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let y = rate * x;
    libm::erfc(y.sqrt()) + 2.0 * (y / PI).sqrt() * (-y).exp()
}
