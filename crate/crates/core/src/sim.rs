//! Seeded Monte Carlo harness for fixed-K common-change scenarios.
//!
//! Panels `0..K` switch from `N(0, 1)` to `N(μ, 1)` after time `ν`; the rest
//! stay in control. Each replication runs detection to the alarm (or the
//! horizon), then isolation at every `α` of the grid. Replication `r` draws
//! from ChaCha8 stream `r` under the scenario seed, so results do not depend
//! on scheduling.

use crate::detector::{calibrate_limit, AlarmReport, Detector, DetectorConfig};
use crate::error::{Error, Result};
use crate::isolation::{isolate, IsolationResult};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub n_panels: usize,
    pub k_changed: usize,
    pub nu: u64,
    pub mu: f64,
    pub delta: f64,
    pub target_arl0: f64,
    pub alpha_grid: Vec<f64>,
    pub replications: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_horizon: Option<u64>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::Config(format!("{field}: {why}")));
        if self.n_panels == 0 {
            return bad("n_panels", "must be at least 1".into());
        }
        if self.k_changed > self.n_panels {
            return bad(
                "k_changed",
                format!("{} exceeds n_panels = {}", self.k_changed, self.n_panels),
            );
        }
        if !self.mu.is_finite() {
            return bad("mu", format!("must be finite, got {}", self.mu));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta", format!("must be positive, got {}", self.delta));
        }
        if !(self.target_arl0 > 0.0 && self.target_arl0.is_finite()) {
            return bad(
                "target_arl0",
                format!("must be positive, got {}", self.target_arl0),
            );
        }
        if self.alpha_grid.is_empty() {
            return bad("alpha_grid", "must not be empty".into());
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad("alpha_grid", format!("{a} outside (0, 1)"));
        }
        if self.replications == 0 {
            return bad("replications", "must be at least 1".into());
        }
        if self.horizon() <= self.nu {
            return bad(
                "max_horizon",
                format!("{} must exceed nu = {}", self.horizon(), self.nu),
            );
        }
        Ok(())
    }

    pub fn alarm_limit(&self) -> Result<f64> {
        calibrate_limit(self.delta, self.n_panels, self.target_arl0)
    }

    /// Explicit horizon, or `ν + 20·ARL₀`.
    pub fn horizon(&self) -> u64 {
        self.max_horizon
            .unwrap_or_else(|| self.nu + (20.0 * self.target_arl0).ceil() as u64)
    }

    fn detector_config(&self) -> Result<DetectorConfig> {
        // fdr_level is unused by the detector itself; alphas come from the grid.
        DetectorConfig::new(
            self.delta,
            self.n_panels,
            Some(self.alarm_limit()?),
            Some(self.target_arl0),
            self.alpha_grid[0],
        )
    }
}

/// Lazily generated observations of one replication.
#[derive(Debug, Clone)]
pub struct ObservationStream {
    rng: ChaCha8Rng,
    n_panels: usize,
    k_changed: usize,
    nu: u64,
    mu: f64,
    t: u64,
    horizon: u64,
}

impl ObservationStream {
    /// Current time (number of slices produced).
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Writes the next time slice into `buf`; `false` once the horizon is reached.
    pub fn fill_next(&mut self, buf: &mut [f64]) -> bool {
        debug_assert_eq!(buf.len(), self.n_panels);
        if self.t >= self.horizon {
            return false;
        }
        self.t += 1;
        for x in buf.iter_mut() {
            *x = StandardNormal.sample(&mut self.rng);
        }
        if self.t > self.nu {
            for x in &mut buf[..self.k_changed] {
                *x += self.mu;
            }
        }
        true
    }
}

impl Iterator for ObservationStream {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let mut buf = vec![0.0; self.n_panels];
        self.fill_next(&mut buf).then_some(buf)
    }
}

pub fn gen_replication(scenario: &Scenario, rep_index: u64) -> ObservationStream {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(rep_index);
    ObservationStream {
        rng,
        n_panels: scenario.n_panels,
        k_changed: scenario.k_changed,
        nu: scenario.nu,
        mu: scenario.mu,
        t: 0,
        horizon: scenario.horizon(),
    }
}

/// Isolation outcome of one replication at one `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub alpha: f64,
    pub isolation: IsolationResult,
    /// Selected panels that did not change.
    pub false_selected: usize,
    /// Changed panels that were not selected.
    pub missed: usize,
    /// `false_selected / max(K̂, 1)`.
    pub fdr: f64,
    /// `missed / K`, absent when `K = 0`.
    pub fnr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep_index: u64,
    /// Alarm time, absent when the horizon was reached without an alarm.
    pub tau: Option<u64>,
    pub report: Option<AlarmReport>,
    /// One entry per grid `α`, filled only when `τ > ν`.
    pub cells: Vec<CellRecord>,
}

impl ReplicationRecord {
    pub fn censored(&self) -> bool {
        self.tau.is_none()
    }

    pub fn false_alarm(&self, nu: u64) -> bool {
        self.tau.is_some_and(|tau| tau <= nu)
    }
}

pub fn run_replication(scenario: &Scenario, rep_index: u64) -> Result<ReplicationRecord> {
    scenario.validate()?;
    run_validated(scenario, &scenario.detector_config()?, rep_index)
}

fn run_validated(
    scenario: &Scenario,
    config: &DetectorConfig,
    rep_index: u64,
) -> Result<ReplicationRecord> {
    let mut stream = gen_replication(scenario, rep_index);
    let mut detector = Detector::new(config.clone())?;
    let mut buf = vec![0.0; scenario.n_panels];
    let mut tau = None;
    while stream.fill_next(&mut buf) {
        if detector.step(&buf)? {
            tau = detector.alarm_time();
            break;
        }
    }
    let Some(t) = tau else {
        return Ok(ReplicationRecord {
            rep_index,
            tau: None,
            report: None,
            cells: Vec::new(),
        });
    };
    let report = detector.report()?;
    let mut cells = Vec::new();
    if t > scenario.nu {
        let k = scenario.k_changed;
        for &alpha in &scenario.alpha_grid {
            let isolation = isolate(&report, scenario.delta, alpha)?;
            let true_selected = isolation.selected.iter().filter(|&&i| i < k).count();
            let false_selected = isolation.k_hat - true_selected;
            let missed = k - true_selected;
            cells.push(CellRecord {
                alpha,
                fdr: false_selected as f64 / isolation.k_hat.max(1) as f64,
                fnr: (k > 0).then(|| missed as f64 / k as f64),
                false_selected,
                missed,
                isolation,
            });
        }
    }
    Ok(ReplicationRecord {
        rep_index,
        tau: Some(t),
        report: Some(report),
        cells,
    })
}

/// Sample mean with its Monte Carlo standard error (absent for n < 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: Option<f64>,
    pub n: u64,
}

impl Estimate {
    /// Two-pass mean/variance in slice order; `None` for an empty sample.
    pub fn from_samples(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = (values.len() > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1.0) / n).sqrt()
        });
        Some(Self {
            mean,
            se,
            n: values.len() as u64,
        })
    }
}

/// Interpolated median; `None` for an empty sample.
pub fn sample_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaMetrics {
    pub alpha: f64,
    pub fdr: Estimate,
    /// Missing when `K = 0`.
    pub fnr: Option<Estimate>,
    /// `E[ν̃ − ν]` over replications with `K̂ > 0`.
    pub median_bias: Option<Estimate>,
    /// Median across replications of `ν̃ − ν`.
    pub median_bias_median: Option<f64>,
    /// `E[ν̂ − ν]` (mean aggregate) over replications with `K̂ > 0`.
    pub mean_bias: Option<Estimate>,
    /// Median across replications of `ν̂ − ν`.
    pub mean_bias_median: Option<f64>,
    pub e_k_hat: Estimate,
    /// Theoretical FDR bound `α(N − K)/N`.
    pub fdr_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    pub scenario: Scenario,
    pub alarm_limit: f64,
    pub replications: u64,
    /// `P(τ ≤ ν)` over all replications.
    pub far: Estimate,
    /// `E[τ − ν | τ > ν]` over non-censored replications.
    pub cadt: Estimate,
    pub censored_count: u64,
    pub false_alarm_count: u64,
    pub effective_count: u64,
    pub per_alpha: Vec<AlphaMetrics>,
}

impl ScenarioMetrics {
    pub fn alpha(&self, alpha: f64) -> Option<&AlphaMetrics> {
        self.per_alpha
            .iter()
            .find(|m| (m.alpha - alpha).abs() < 1e-12)
    }
}

/// Runs all replications (in parallel) and reduces them in replication order.
pub fn run_replications(scenario: &Scenario) -> Result<Vec<ReplicationRecord>> {
    scenario.validate()?;
    let config = scenario.detector_config()?;
    (0..scenario.replications)
        .into_par_iter()
        .map(|r| run_validated(scenario, &config, r))
        .collect()
}

pub fn run_experiment(scenario: &Scenario) -> Result<ScenarioMetrics> {
    let records = run_replications(scenario)?;
    aggregate(scenario, &records)
}

/// Reduces replication records into scenario metrics. Records are sorted by
/// replication index first, so the result is independent of input order.
pub fn aggregate(scenario: &Scenario, records: &[ReplicationRecord]) -> Result<ScenarioMetrics> {
    scenario.validate()?;
    let mut ordered: Vec<&ReplicationRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.rep_index);

    let nu = scenario.nu;
    let total = ordered.len() as u64;
    let censored = ordered.iter().filter(|r| r.censored()).count() as u64;
    let false_alarms = ordered.iter().filter(|r| r.false_alarm(nu)).count() as u64;
    let effective: Vec<&ReplicationRecord> = ordered
        .iter()
        .copied()
        .filter(|r| r.tau.is_some_and(|t| t > nu))
        .collect();
    if effective.is_empty() {
        return Err(Error::EmptyResult {
            total,
            censored,
            false_alarms,
        });
    }

    let far_samples: Vec<f64> = ordered
        .iter()
        .map(|r| if r.false_alarm(nu) { 1.0 } else { 0.0 })
        .collect();
    let delays: Vec<f64> = effective
        .iter()
        .map(|r| (r.tau.expect("effective replications have an alarm") - nu) as f64)
        .collect();

    let nu_f = nu as f64;
    let k = scenario.k_changed;
    let n = scenario.n_panels;
    let per_alpha = scenario
        .alpha_grid
        .iter()
        .enumerate()
        .map(|(j, &alpha)| {
            let cells: Vec<&CellRecord> = effective.iter().map(|r| &r.cells[j]).collect();
            let collect = |f: &dyn Fn(&CellRecord) -> Option<f64>| -> Vec<f64> {
                cells.iter().filter_map(|c| f(c)).collect()
            };
            let fdr = collect(&|c| Some(c.fdr));
            let fnr = collect(&|c| c.fnr);
            let med = collect(&|c| c.isolation.nu_median.map(|m| m - nu_f));
            let mean = collect(&|c| c.isolation.nu_mean.map(|m| m - nu_f));
            let k_hat = collect(&|c| Some(c.isolation.k_hat as f64));
            AlphaMetrics {
                alpha,
                fdr: Estimate::from_samples(&fdr).expect("non-empty"),
                fnr: Estimate::from_samples(&fnr),
                median_bias: Estimate::from_samples(&med),
                median_bias_median: sample_median(&med),
                mean_bias: Estimate::from_samples(&mean),
                mean_bias_median: sample_median(&mean),
                e_k_hat: Estimate::from_samples(&k_hat).expect("non-empty"),
                fdr_bound: alpha * (n - k) as f64 / n as f64,
            }
        })
        .collect();

    Ok(ScenarioMetrics {
        scenario: scenario.clone(),
        alarm_limit: scenario.alarm_limit()?,
        replications: total,
        far: Estimate::from_samples(&far_samples).expect("non-empty"),
        cadt: Estimate::from_samples(&delays).expect("non-empty"),
        censored_count: censored,
        false_alarm_count: false_alarms,
        effective_count: effective.len() as u64,
        per_alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Scenario {
        Scenario {
            label: None,
            n_panels: 20,
            k_changed: 4,
            nu: 30,
            mu: 1.0,
            delta: 0.5,
            target_arl0: 200.0,
            alpha_grid: vec![0.2, 0.3],
            replications: 50,
            seed: 11,
            max_horizon: None,
        }
    }

    #[test]
    fn validation_names_fields() {
        let mut s = small();
        s.k_changed = 21;
        let e = s.validate().unwrap_err().to_string();
        assert!(e.contains("k_changed"), "{e}");
        let mut s = small();
        s.alpha_grid = vec![0.2, 1.2];
        assert!(s.validate().unwrap_err().to_string().contains("alpha_grid"));
        let mut s = small();
        s.max_horizon = Some(30);
        assert!(s
            .validate()
            .unwrap_err()
            .to_string()
            .contains("max_horizon"));
    }

    #[test]
    fn default_horizon() {
        assert_eq!(small().horizon(), 30 + 4000);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = small();
        let a: Vec<Vec<f64>> = gen_replication(&s, 3).take(5).collect();
        let b: Vec<Vec<f64>> = gen_replication(&s, 3).take(5).collect();
        let c: Vec<Vec<f64>> = gen_replication(&s, 4).take(5).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn stream_stops_at_horizon() {
        let mut s = small();
        s.max_horizon = Some(40);
        assert_eq!(gen_replication(&s, 0).count(), 40);
    }

    #[test]
    fn zero_shift_matches_null_scenario() {
        let mut a = small();
        a.mu = 0.0;
        let mut b = small();
        b.k_changed = 0;
        b.mu = 0.0;
        let xa: Vec<Vec<f64>> = gen_replication(&a, 9).take(60).collect();
        let xb: Vec<Vec<f64>> = gen_replication(&b, 9).take(60).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn replication_is_deterministic() {
        let s = small();
        assert_eq!(
            run_replication(&s, 7).unwrap(),
            run_replication(&s, 7).unwrap()
        );
    }

    #[test]
    fn aggregation_ignores_record_order() {
        let s = small();
        let mut recs = run_replications(&s).unwrap();
        let m1 = aggregate(&s, &recs).unwrap();
        recs.reverse();
        let m2 = aggregate(&s, &recs).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn all_false_alarms_is_empty_result() {
        let mut s = small();
        s.nu = 100_000;
        s.replications = 3;
        assert!(matches!(run_experiment(&s), Err(Error::EmptyResult { .. })));
    }

    #[test]
    fn single_replication_has_no_standard_errors() {
        let mut s = small();
        s.replications = 1;
        s.mu = 3.0;
        s.nu = 5;
        let m = run_experiment(&s).unwrap();
        assert_eq!(m.effective_count, 1);
        assert!(m.cadt.se.is_none());
        assert!(m.per_alpha[0].fdr.se.is_none());
    }

    #[test]
    fn null_scenario_reports_missing_fnr() {
        let mut s = small();
        s.k_changed = 0;
        s.nu = 0;
        s.replications = 5;
        let m = run_experiment(&s).unwrap();
        assert!(m.per_alpha.iter().all(|a| a.fnr.is_none()));
    }

    #[test]
    fn estimate_from_samples() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        let sd = (5.0_f64 / 3.0).sqrt();
        assert!((e.se.unwrap() - sd / 2.0).abs() < 1e-15);
        assert!(Estimate::from_samples(&[]).is_none());
        assert_eq!(sample_median(&[3.0, -1.0, 2.0]), Some(2.0));
        assert_eq!(sample_median(&[3.0, -1.0, 2.0, -2.0]), Some(0.5));
        assert_eq!(sample_median(&[]), None);
    }
}
