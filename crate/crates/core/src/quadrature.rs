//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and semi-infinite
//! intervals.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-8,
            abs: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self {
            rel,
            abs,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, bisecting the segment with the largest
/// error estimate until the total error meets the tolerance.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric(format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let first = kronrod15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Numeric(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    loop {
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Estimate {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] stalled at error {error:.3e} after {} intervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment no longer divisible in floating point.
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] hit round-off at error {error:.3e}"
            )));
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        if !value.is_finite() {
            return Err(Error::Numeric("integrand not finite".into()));
        }
        heap.push(left);
        heap.push(right);
        // Re-summing avoids drift from the running update.
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Integrates `f` over `[a, ∞)` through `t = a + scale · u / (1 − u)`.
///
/// `scale` should be of the order of the integrand's characteristic width.
pub fn integrate_to_infinity<F>(f: F, a: f64, scale: f64, tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !(scale > 0.0) {
        return Err(Error::Numeric(format!("non-positive scale {scale}")));
    }
    let mapped = |u: f64| {
        let one_minus = 1.0 - u;
        let t = a + scale * u / one_minus;
        let jac = scale / (one_minus * one_minus);
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    integrate(mapped, 0.0, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_is_exact_for_low_degree_polynomials() {
        let seg = kronrod15(&|x: f64| x.powi(20) - 3.0 * x.powi(7) + 1.0, -1.0, 1.0);
        assert_relative_eq!(seg.value, 2.0 / 21.0 + 2.0, max_relative = 1e-14);
    }

    #[test]
    fn oscillatory_finite_interval() {
        let est = integrate(
            |x: f64| (10.0 * x).sin().powi(2),
            0.0,
            3.0,
            Tolerance::default(),
        )
        .unwrap();
        let exact = 1.5 - (60.0_f64).sin() / 40.0;
        assert_relative_eq!(est.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn endpoint_singularity() {
        let est = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 4.0, Tolerance::default()).unwrap();
        assert_relative_eq!(est.value, 4.0, max_relative = 1e-8);
    }

    #[test]
    fn semi_infinite_exponential_and_gaussian() {
        let est = integrate_to_infinity(|x: f64| (-x / 7.0).exp(), 0.0, 7.0, Tolerance::default())
            .unwrap();
        assert_relative_eq!(est.value, 7.0, max_relative = 1e-9);
        let g =
            integrate_to_infinity(|x: f64| (-x * x).exp(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert_relative_eq!(
            g.value,
            std::f64::consts::PI.sqrt() / 2.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn failures_are_reported() {
        let r = integrate_to_infinity(|_| 1.0, 0.0, 1.0, Tolerance::default());
        assert!(matches!(r, Err(Error::Numeric(_))), "{r:?}");
        let tight = Tolerance {
            max_intervals: 3,
            ..Tolerance::default()
        };
        let r = integrate(|x: f64| (40.0 * x).sin().powi(2), 0.0, 10.0, tight);
        assert!(matches!(r, Err(Error::Numeric(_))), "{r:?}");
    }
}
