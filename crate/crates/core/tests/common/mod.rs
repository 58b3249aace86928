//! Helpers shared by the integration tests: nested quadrature over the joint
//! density and a Kolmogorov distance against a continuous reference CDF.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use srcusum_core::quadrature::{integrate, integrate_to_infinity, Tolerance};
use srcusum_core::NullLaw;

pub fn tol(rel: f64) -> Tolerance {
    Tolerance {
        rel,
        abs: 1e-14,
        max_intervals: 20_000,
    }
}

/// `∫_0^∞ g(x) f(t, x) dx` for a fixed `t`.
pub fn inner_over_level(law: &NullLaw, t: f64, g: impl Fn(f64) -> f64) -> f64 {
    let scale = t.sqrt().max(f64::MIN_POSITIVE);
    integrate_to_infinity(|x| g(x) * law.joint_density(t, x), 0.0, scale, tol(1e-11))
        .expect("inner quadrature")
        .value
}

/// `∫_0^∞ ∫_0^∞ h(t, x) f(t, x) dx dt` with `h(t, x) = a(t) b(x)`.
pub fn joint_expectation(
    law: &NullLaw,
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64 + Copy,
) -> f64 {
    let scale = 2.0 / (law.delta * law.delta);
    integrate_to_infinity(
        |t| a(t) * inner_over_level(law, t, b),
        0.0,
        scale,
        tol(1e-9),
    )
    .expect("outer quadrature")
    .value
}

/// `∫_0^t ∫_x^∞ f(s, y) dy ds`.
pub fn tail_by_double_integral(law: &NullLaw, t: f64, x: f64) -> f64 {
    let inner = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        integrate_to_infinity(
            |y| law.joint_density(s, y),
            x,
            s.sqrt().max(f64::MIN_POSITIVE),
            tol(1e-11),
        )
        .expect("inner quadrature")
        .value
    };
    integrate(inner, 0.0, t, tol(1e-10))
        .expect("outer quadrature")
        .value
}

/// Kolmogorov distance between the empirical CDF of `sample` and a
/// continuous CDF, accounting for atoms in the sample.
pub fn kolmogorov_distance(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sample.len() {
        let x = sample[i];
        let mut j = i;
        while j < sample.len() && sample[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d
            .max((f - i as f64 / n).abs())
            .max((j as f64 / n - f).abs());
        i = j;
    }
    d
}

/// Maximum of the walk `S_k = Σ (X_j − δ/2)` over `k ≥ 0`, with `S_0 = 0`,
/// and the first index attaining it. The walk stops once it falls `40/δ`
/// below its running maximum, after which a new maximum has probability
/// below `e^{−40}`.
pub fn walk_maximum(delta: f64, seed: u64, index: u64) -> (f64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let drop = 40.0 / delta;
    let (mut s, mut m) = (0.0_f64, 0.0_f64);
    let (mut k, mut argmax) = (0_u64, 0_u64);
    loop {
        let z: f64 = StandardNormal.sample(&mut rng);
        s += z - 0.5 * delta;
        k += 1;
        if s > m {
            m = s;
            argmax = k;
        } else if s < m - drop {
            return (m, argmax);
        }
    }
}
