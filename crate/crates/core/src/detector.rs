//! Combined SR-CUSUM detector over N parallel panels.
//!
//! Each panel carries a Shiryayev–Roberts statistic
//! `R_t(i) = (1 + R_{t−1}(i)) · exp(δ X_t(i) − δ²/2)` and a CUSUM
//! `T_t(i) = max(0, T_{t−1}(i) + X_t(i) − δ/2)`. The alarm fires at the first
//! `t` with `Σ_i R_t(i) > B`; the CUSUM paths are then read off to estimate
//! each panel's change point (last zero) and post-change mean.

use crate::error::{Error, Result};
use crate::RHO;
use serde::{Deserialize, Serialize};

/// One step of the Shiryayev–Roberts recursion.
#[inline]
pub fn sr_recursion(prev: f64, x: f64, delta: f64) -> f64 {
    (1.0 + prev) * (delta * x - 0.5 * delta * delta).exp()
}

/// One step of the CUSUM recursion with reference value `δ/2`.
#[inline]
pub fn cusum_recursion(prev: f64, x: f64, delta: f64) -> f64 {
    (prev + x - 0.5 * delta).max(0.0)
}

/// Alarm limit `B = N · ARL₀ · e^{−ρδ}` from the approximation
/// `ARL₀ ≈ (B/N) e^{ρδ}`.
pub fn calibrate_limit(delta: f64, n_panels: usize, target_arl0: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if n_panels == 0 {
        return Err(Error::Config("n_panels must be at least 1".into()));
    }
    if !(target_arl0 > 0.0 && target_arl0.is_finite()) {
        return Err(Error::Config(format!(
            "target_arl0 must be positive, got {target_arl0}"
        )));
    }
    Ok(n_panels as f64 * target_arl0 * (-RHO * delta).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub delta: f64,
    pub n_panels: usize,
    pub alarm_limit: f64,
    pub target_arl0: Option<f64>,
    pub fdr_level: f64,
}

impl DetectorConfig {
    /// Builds a config from either an explicit alarm limit or a target ARL₀.
    /// An explicit limit wins when both are given.
    pub fn new(
        delta: f64,
        n_panels: usize,
        alarm_limit: Option<f64>,
        target_arl0: Option<f64>,
        fdr_level: f64,
    ) -> Result<Self> {
        let alarm_limit = match (alarm_limit, target_arl0) {
            (Some(b), _) => b,
            (None, Some(arl0)) => calibrate_limit(delta, n_panels, arl0)?,
            (None, None) => {
                return Err(Error::Config(
                    "either alarm_limit or target_arl0 is required".into(),
                ))
            }
        };
        let cfg = Self {
            delta,
            n_panels,
            alarm_limit,
            target_arl0,
            fdr_level,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_limit(
        delta: f64,
        n_panels: usize,
        alarm_limit: f64,
        fdr_level: f64,
    ) -> Result<Self> {
        Self::new(delta, n_panels, Some(alarm_limit), None, fdr_level)
    }

    pub fn from_arl0(
        delta: f64,
        n_panels: usize,
        target_arl0: f64,
        fdr_level: f64,
    ) -> Result<Self> {
        Self::new(delta, n_panels, None, Some(target_arl0), fdr_level)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.n_panels == 0 {
            return Err(Error::Config("n_panels must be at least 1".into()));
        }
        if !(self.alarm_limit > 0.0 && self.alarm_limit.is_finite()) {
            return Err(Error::Config(format!(
                "alarm_limit must be positive, got {}",
                self.alarm_limit
            )));
        }
        if !(self.fdr_level > 0.0 && self.fdr_level < 1.0) {
            return Err(Error::Config(format!(
                "fdr_level must lie in (0, 1), got {}",
                self.fdr_level
            )));
        }
        Ok(())
    }
}

/// Per-panel recursion state.
///
/// `update_sr` advances the clock; `update_cusum` applies the CUSUM step for
/// the current time, so a full time step is `update_sr` followed by
/// `update_cusum` (see [`PanelState::observe`]).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PanelState {
    pub sr_value: f64,
    pub cusum_value: f64,
    pub last_zero: u64,
    pub t: u64,
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite observation {x}")))
    }
}

impl PanelState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update_sr(self, x: f64, delta: f64) -> Result<Self> {
        check_finite(x)?;
        Ok(Self {
            sr_value: sr_recursion(self.sr_value, x, delta),
            t: self.t + 1,
            ..self
        })
    }

    pub fn update_cusum(self, x: f64, delta: f64) -> Result<Self> {
        check_finite(x)?;
        let cusum_value = cusum_recursion(self.cusum_value, x, delta);
        let last_zero = if cusum_value == 0.0 {
            self.t
        } else {
            self.last_zero
        };
        Ok(Self {
            cusum_value,
            last_zero,
            ..self
        })
    }

    /// Applies both recursions for one new observation.
    pub fn observe(&mut self, x: f64, delta: f64) -> Result<()> {
        check_finite(x)?;
        self.t += 1;
        self.sr_value = sr_recursion(self.sr_value, x, delta);
        self.cusum_value = cusum_recursion(self.cusum_value, x, delta);
        if self.cusum_value == 0.0 {
            self.last_zero = self.t;
        }
        Ok(())
    }
}

/// Advances every panel by one time slice. Returns `(Σ R_t(i), R_t > B)`.
///
/// Observations are validated before any panel is touched, so an error
/// leaves the panels unchanged.
pub fn step_all(
    panels: &mut [PanelState],
    observations: &[f64],
    config: &DetectorConfig,
) -> Result<(f64, bool)> {
    if observations.len() != panels.len() || panels.len() != config.n_panels {
        return Err(Error::Dimension {
            expected: config.n_panels,
            got: if panels.len() != config.n_panels {
                panels.len()
            } else {
                observations.len()
            },
        });
    }
    if let Some((i, x)) = observations
        .iter()
        .enumerate()
        .find(|(_, x)| !x.is_finite())
    {
        return Err(Error::InvalidInput(format!(
            "non-finite observation {x} for panel {i}"
        )));
    }
    let delta = config.delta;
    let mut global = 0.0;
    for (panel, &x) in panels.iter_mut().zip(observations) {
        panel.t += 1;
        panel.sr_value = sr_recursion(panel.sr_value, x, delta);
        panel.cusum_value = cusum_recursion(panel.cusum_value, x, delta);
        if panel.cusum_value == 0.0 {
            panel.last_zero = panel.t;
        }
        global += panel.sr_value;
    }
    Ok((global, global > config.alarm_limit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelStat {
    /// 0-based panel index.
    pub panel: usize,
    /// `T_τ(i)`.
    pub cusum: f64,
    /// Last zero of the CUSUM at or before τ.
    pub nu_hat: u64,
    /// `T_τ(i)/(τ − ν̂_i) + δ/2`, absent when `ν̂_i = τ`.
    pub mu_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlarmReport {
    pub tau: u64,
    pub global_sr: f64,
    pub panel_stats: Vec<PanelStat>,
}

/// Reads the per-panel evidence off the panels at the alarm time.
pub fn snapshot_alarm(
    panels: &[PanelState],
    tau: u64,
    config: &DetectorConfig,
) -> Result<AlarmReport> {
    if tau == 0 {
        return Err(Error::State("no alarm can fire at t = 0".into()));
    }
    if let Some(p) = panels.iter().find(|p| p.t != tau) {
        return Err(Error::State(format!(
            "panel clock at t = {} does not match alarm time {tau}",
            p.t
        )));
    }
    let global_sr: f64 = panels.iter().map(|p| p.sr_value).sum();
    if !(global_sr > config.alarm_limit) {
        return Err(Error::State(format!(
            "statistic {global_sr} has not crossed the limit {}",
            config.alarm_limit
        )));
    }
    let half_delta = 0.5 * config.delta;
    let panel_stats = panels
        .iter()
        .enumerate()
        .map(|(panel, p)| {
            let run = tau - p.last_zero;
            PanelStat {
                panel,
                cusum: p.cusum_value,
                nu_hat: p.last_zero,
                mu_hat: (run > 0).then(|| p.cusum_value / run as f64 + half_delta),
            }
        })
        .collect();
    Ok(AlarmReport {
        tau,
        global_sr,
        panel_stats,
    })
}

/// Owns the panel states for one monitoring run.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectorConfig,
    panels: Vec<PanelState>,
    global_sr: f64,
    alarm_at: Option<u64>,
}

impl Detector {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            panels: vec![PanelState::new(); config.n_panels],
            config,
            global_sr: 0.0,
            alarm_at: None,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn panels(&self) -> &[PanelState] {
        &self.panels
    }

    pub fn global_sr(&self) -> f64 {
        self.global_sr
    }

    pub fn t(&self) -> u64 {
        self.panels.first().map_or(0, |p| p.t)
    }

    pub fn alarm_time(&self) -> Option<u64> {
        self.alarm_at
    }

    /// Feeds one time slice. Returns whether the alarm fired on this step.
    /// Once fired, further steps are refused.
    pub fn step(&mut self, observations: &[f64]) -> Result<bool> {
        if let Some(tau) = self.alarm_at {
            return Err(Error::State(format!("alarm already raised at t = {tau}")));
        }
        let (global, alarm) = step_all(&mut self.panels, observations, &self.config)?;
        self.global_sr = global;
        if alarm {
            self.alarm_at = Some(self.t());
        }
        Ok(alarm)
    }

    pub fn report(&self) -> Result<AlarmReport> {
        match self.alarm_at {
            Some(tau) => snapshot_alarm(&self.panels, tau, &self.config),
            None => Err(Error::State("alarm has not been raised".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(n: usize, b: f64) -> DetectorConfig {
        DetectorConfig::with_limit(0.5, n, b, 0.2).unwrap()
    }

    #[test]
    fn sr_one_step() {
        let s = PanelState::new().update_sr(0.0, 0.5).unwrap();
        assert_relative_eq!(s.sr_value, (-0.125_f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(s.sr_value, 0.882_497, epsilon = 1e-6);
        assert_eq!(s.t, 1);
        assert_eq!(s.cusum_value, 0.0);
        let s = PanelState::new().update_sr(0.25, 0.5).unwrap();
        assert_eq!(s.sr_value, 1.0);
    }

    #[test]
    fn cusum_one_step() {
        let s = PanelState::new().update_cusum(1.0, 0.5).unwrap();
        assert_eq!(s.cusum_value, 0.75);
        let s = PanelState {
            cusum_value: 0.1,
            t: 7,
            last_zero: 3,
            sr_value: 1.0,
        }
        .update_cusum(-2.0, 0.5)
        .unwrap();
        assert_eq!(s.cusum_value, 0.0);
        assert_eq!(s.last_zero, 7);
        let s = PanelState::new().update_cusum(0.25, 0.5).unwrap();
        assert_eq!(s.cusum_value, 0.0);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            PanelState::new().update_sr(f64::NAN, 0.5),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            PanelState::new().update_cusum(f64::INFINITY, 0.5),
            Err(Error::InvalidInput(_))
        ));
        let mut panels = vec![PanelState::new(); 2];
        assert!(step_all(&mut panels, &[0.0, f64::NAN], &cfg(2, 10.0)).is_err());
        assert_eq!(panels[0].t, 0, "failed step must not advance any panel");
    }

    #[test]
    fn two_panel_step() {
        let mut panels = vec![PanelState::new(); 2];
        let (g, alarm) = step_all(&mut panels, &[0.0, 0.0], &cfg(2, 10.0)).unwrap();
        assert_relative_eq!(g, 1.764_994, epsilon = 1e-6);
        assert!(!alarm);
    }

    #[test]
    fn alarm_requires_strict_excess() {
        // One panel, x = δ/2 gives R_1 = 1 exactly.
        let mut panels = vec![PanelState::new()];
        let (g, alarm) = step_all(&mut panels, &[0.25], &cfg(1, 1.0)).unwrap();
        assert_eq!(g, 1.0);
        assert!(!alarm);
        let mut panels = vec![PanelState::new()];
        let (_, alarm) = step_all(&mut panels, &[0.25], &cfg(1, 0.999_999)).unwrap();
        assert!(alarm);
    }

    #[test]
    fn dimension_mismatch() {
        let mut panels = vec![PanelState::new(); 3];
        assert_eq!(
            step_all(&mut panels, &[0.0, 0.0], &cfg(3, 10.0)),
            Err(Error::Dimension {
                expected: 3,
                got: 2
            })
        );
    }

    #[test]
    fn calibration_values() {
        let b = calibrate_limit(0.5, 100, 1000.0).unwrap();
        assert!(((b - 74_729.5) / 74_729.5).abs() < 1e-4);
        let b = calibrate_limit(0.5, 100, 5000.0).unwrap();
        assert!(((b - 373_645.7) / 373_645.7).abs() < 1e-4);
        assert_relative_eq!(calibrate_limit(1e-300, 1, 1.0).unwrap(), 1.0);
        assert!(calibrate_limit(0.0, 1, 1.0).is_err());
        assert!(calibrate_limit(0.5, 0, 1.0).is_err());
        assert!(calibrate_limit(0.5, 1, -1.0).is_err());
    }

    #[test]
    fn config_from_arl0_derives_limit() {
        let c = DetectorConfig::from_arl0(0.5, 100, 1000.0, 0.3).unwrap();
        assert!(c.alarm_limit > 0.0);
        assert_eq!(c.alarm_limit, calibrate_limit(0.5, 100, 1000.0).unwrap());
        assert!(DetectorConfig::new(0.5, 10, None, None, 0.3).is_err());
        assert!(DetectorConfig::with_limit(0.5, 10, 100.0, 1.0).is_err());
        assert!(DetectorConfig::with_limit(-0.5, 10, 100.0, 0.2).is_err());
    }

    #[test]
    fn snapshot_estimates() {
        let config = cfg(2, 1.0);
        let panels = vec![
            PanelState {
                sr_value: 3.0,
                cusum_value: 0.0,
                last_zero: 40,
                t: 40,
            },
            PanelState {
                sr_value: 3.0,
                cusum_value: 5.0,
                last_zero: 20,
                t: 40,
            },
        ];
        let r = snapshot_alarm(&panels, 40, &config).unwrap();
        assert_eq!(r.panel_stats[0].nu_hat, 40);
        assert_eq!(r.panel_stats[0].mu_hat, None);
        assert_eq!(r.panel_stats[1].nu_hat, 20);
        assert_relative_eq!(r.panel_stats[1].mu_hat.unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(r.global_sr, 6.0);
    }

    #[test]
    fn snapshot_before_alarm_is_state_error() {
        let d = Detector::new(cfg(2, 1e9)).unwrap();
        assert!(matches!(d.report(), Err(Error::State(_))));
        let panels = vec![PanelState {
            sr_value: 0.1,
            t: 3,
            ..Default::default()
        }];
        assert!(matches!(
            snapshot_alarm(&panels, 3, &cfg(1, 1.0)),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn detector_refuses_steps_after_alarm() {
        let mut d = Detector::new(cfg(1, 2.0)).unwrap();
        let mut fired = false;
        for _ in 0..100 {
            if d.step(&[2.0]).unwrap() {
                fired = true;
                break;
            }
        }
        assert!(fired);
        assert!(d.report().unwrap().global_sr > 2.0);
        assert!(matches!(d.step(&[0.0]), Err(Error::State(_))));
    }
}
