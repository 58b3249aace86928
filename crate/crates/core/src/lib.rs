//! Detection of a common change across parallel Gaussian streams.
//!
//! The crate is organised around the life cycle of one monitoring run:
//!
//! - [`detector`]: per-panel Shiryayev–Roberts and CUSUM recursions, the
//!   combined alarm `R_t = Σ R_t(i) > B`, alarm-limit calibration and the
//!   alarm-time snapshot (last-zero change-point and post-change mean estimates).
//! - [`isolation`]: p-values from the overshoot-corrected exponential null of
//!   the CUSUM value, Benjamini–Hochberg step-up selection and aggregation of
//!   the common change point over the selected panels.
//! - [`analytic`]: null laws of the maximum `M` and argmax `σ_M` of a
//!   negatively drifted Brownian motion / Gaussian random walk.
//! - [`sim`]: seeded Monte Carlo harness for fixed-K common-change scenarios.
//!
//! [`special`] and [`quadrature`] hold the numerical plumbing used by
//! [`analytic`].

pub mod analytic;
pub mod detector;
pub mod error;
pub mod isolation;
pub mod quadrature;
pub mod sim;
pub mod special;

pub use analytic::NullLaw;
pub use detector::{
    calibrate_limit, snapshot_alarm, step_all, AlarmReport, Detector, DetectorConfig, PanelStat,
    PanelState,
};
pub use error::{Error, Result};
pub use isolation::{aggregate_changepoint, bh_select, isolate, pvalues, IsolationResult};
pub use sim::{run_experiment, run_replication, Scenario, ScenarioMetrics};

/// Overshoot correction constant of the standard normal random walk.
pub const RHO: f64 = 0.5826;
