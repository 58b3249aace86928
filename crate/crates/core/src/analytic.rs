//! Null laws of the maximum `M` and its location `σ_M`.
//!
//! For an unchanged panel, `(τ − ν̂_i, T_τ(i))` behaves like `(σ_M, M)` for a
//! random walk with increments `N(−δ/2, 1)`. In the Brownian limit:
//!
//! - `M ~ Exp(δ)`,
//! - `σ_M | M = x` is inverse Gaussian, the first passage time of `x` for a
//!   Brownian motion with drift `+δ/2`,
//! - the joint density is `f(t, x) = δx t^{-3/2} φ(x/√t + (δ/2)√t)`.
//!
//! In discrete time, `δ(M + ρ)` is close to standard exponential for small
//! `δ`, and the conditional law of `σ_M` is corrected by shifting the level
//! by the overshoot constant `ρ`.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, Tolerance};
use crate::special::{
    exp_times_normal_cdf, gamma_three_halves_cdf, gamma_three_halves_sf, normal_cdf, normal_pdf,
    normal_sf,
};
use crate::RHO;
use serde::{Deserialize, Serialize};

/// `(E[σ_M], Var σ_M, Cov(σ_M, M), Corr(σ_M, M))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaMoments {
    pub mean: f64,
    pub variance: f64,
    pub covariance: f64,
    pub correlation: f64,
}

/// The three expectations over an independent `M′ ~ Exp(δ)` that make up
/// the joint law of `(σ_M, M)` at `(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTerms {
    /// `P*[sup_{s<t} W_s > M′]`, which equals `P[σ_M < t]`.
    pub first_passage: f64,
    /// `E[e^{δM′} Φ(−(x+M′)/√t − (δ/2)√t)]`.
    pub cross_then_below: f64,
    /// `E[e^{−δx} Φ(−(x+M′)/√t + (δ/2)√t)]`.
    pub exceed_then_below: f64,
}

impl JointTerms {
    /// `P[σ_M < t, M ≤ x]`.
    pub fn joint_cdf(&self) -> f64 {
        (self.first_passage - self.cross_then_below - self.exceed_then_below).clamp(0.0, 1.0)
    }

    /// `P[σ_M < t, M > x]`.
    pub fn tail(&self) -> f64 {
        (self.cross_then_below + self.exceed_then_below).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullLaw {
    pub delta: f64,
    pub rho: f64,
}

impl NullLaw {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!(
                "delta must be positive, got {delta}"
            )));
        }
        Ok(Self { delta, rho: RHO })
    }

    #[inline]
    fn half_drift_root(&self, t: f64) -> f64 {
        0.5 * self.delta * t.sqrt()
    }

    /// `P[M > x] = e^{−δx}`.
    pub fn m_tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.delta * x).exp()
        }
    }

    /// Joint density of `(σ_M, M)`.
    pub fn joint_density(&self, t: f64, x: f64) -> f64 {
        if !(t > 0.0 && x > 0.0) || t.is_infinite() {
            return 0.0;
        }
        let rt = t.sqrt();
        self.delta * x / (t * rt) * normal_pdf(x / rt + self.half_drift_root(t))
    }

    /// `P[σ_M < t | M = x]`, the first-passage CDF of level `x` for drift `+δ/2`.
    pub fn conditional_sigma_cdf(&self, t: f64, x: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t.is_infinite() {
            return 1.0;
        }
        if x <= 0.0 {
            return 1.0;
        }
        let rt = t.sqrt();
        let b = self.half_drift_root(t);
        let v = exp_times_normal_cdf(self.delta * x, -x / rt - b) + normal_cdf(-x / rt + b);
        v.clamp(0.0, 1.0)
    }

    /// Inverse Gaussian density of `σ_M` given `M = x`.
    pub fn conditional_sigma_density(&self, t: f64, x: f64) -> f64 {
        if !(t > 0.0 && x > 0.0) || t.is_infinite() {
            return 0.0;
        }
        let rt = t.sqrt();
        x / (t * rt) * normal_pdf(-x / rt + self.half_drift_root(t))
    }

    /// Marginal density of `σ_M`.
    pub fn sigma_marginal_density(&self, t: f64) -> f64 {
        if !(t > 0.0) || t.is_infinite() {
            return 0.0;
        }
        let b = self.half_drift_root(t);
        let v =
            self.delta / t.sqrt() * normal_pdf(b) - 0.5 * self.delta * self.delta * normal_sf(b);
        v.max(0.0)
    }

    /// `P[σ_M > t]`.
    pub fn sigma_survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        if t.is_infinite() {
            return 0.0;
        }
        let d2 = self.delta * self.delta;
        let b = self.half_drift_root(t);
        let v = (4.0 + 0.5 * d2 * t) * normal_sf(b) - gamma_three_halves_sf(t, d2 / 8.0);
        v.clamp(0.0, 1.0)
    }

    /// `P[σ_M ≤ t]`, the complement of [`Self::sigma_survival`] built from the
    /// gamma CDF directly.
    pub fn sigma_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t.is_infinite() {
            return 1.0;
        }
        let survival = self.sigma_survival(t);
        if survival < 0.5 {
            // In the upper tail the complement is the better-conditioned form.
            return 1.0 - survival;
        }
        let d2 = self.delta * self.delta;
        let b = self.half_drift_root(t);
        let v =
            1.0 - (4.0 + 0.5 * d2 * t) * normal_sf(b) + 1.0 - gamma_three_halves_cdf(t, d2 / 8.0);
        v.clamp(0.0, 1.0)
    }

    pub fn sigma_m_moments(&self) -> SigmaMoments {
        let d = self.delta;
        SigmaMoments {
            mean: 2.0 / (d * d),
            variance: 12.0 / d.powi(4),
            covariance: 2.0 / d.powi(3),
            correlation: 1.0 / 3.0_f64.sqrt(),
        }
    }

    /// Evaluates the three `M′`-expectations by quadrature over `u = δM′`.
    pub fn joint_terms(&self, t: f64, x: f64) -> Result<JointTerms> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
        }
        if !(x >= 0.0) || x.is_infinite() {
            return Err(Error::InvalidInput(format!(
                "x must be finite and nonnegative, got {x}"
            )));
        }
        if t.is_infinite() {
            return Ok(JointTerms {
                first_passage: 1.0,
                cross_then_below: 0.0,
                exceed_then_below: self.m_tail(x),
            });
        }
        let d = self.delta;
        let rt = t.sqrt();
        let b = self.half_drift_root(t);
        let tol = Tolerance::new(1e-8, 1e-12);
        // Gaussian factors decay on the scale u ~ δ√t; the Exp(1) weight on u ~ 1.
        let scale = (d * rt).max(1.0);
        let level = |u: f64| u / d;

        // e^{δy}·δe^{−δy} dy = du, so these two integrands carry no exponential.
        let first = integrate_to_infinity(
            |u| (-u).exp() * normal_cdf(-level(u) / rt + b) + normal_cdf(-level(u) / rt - b),
            0.0,
            scale,
            tol,
        )?;
        let cross =
            integrate_to_infinity(|u| normal_cdf(-(x + level(u)) / rt - b), 0.0, scale, tol)?;
        let exceed = integrate_to_infinity(
            |u| (-u).exp() * normal_cdf(-(x + level(u)) / rt + b),
            0.0,
            scale,
            tol,
        )?;
        Ok(JointTerms {
            first_passage: first.value,
            cross_then_below: cross.value,
            exceed_then_below: (-d * x).exp() * exceed.value,
        })
    }

    /// `P[σ_M < t, M > x]`.
    pub fn joint_tail(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.joint_terms(t, x)?.tail())
    }

    /// `P(δ(M + ρ) < x) ≈ 1 − e^{−x}` for the discrete-time walk.
    pub fn corrected_exponential_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x).exp_m1()
        }
    }

    /// `P[σ_M ≤ n | M = x]` for the discrete-time walk, approximated by the
    /// inverse Gaussian law with the level shifted to `x + ρ`.
    pub fn ig_overshoot_cdf(&self, n: f64, x: f64) -> f64 {
        self.conditional_sigma_cdf(n, x + self.rho)
    }
}
