//! Isolation of changed panels after an alarm.
//!
//! Under no change, `δ(T_τ(i) + ρ)` is approximately standard exponential, so
//! `p_i = exp(−δ(T_τ(i) + ρ))` serves as a p-value. The Benjamini–Hochberg
//! step-up rule `K̂ = max{i : p_(i) < α i / N}` then selects the panels with the
//! `K̂` smallest p-values, and the common change point is estimated from their
//! last-zero estimates.

use crate::detector::AlarmReport;
use crate::error::{Error, Result};
use crate::RHO;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationResult {
    /// Per-panel p-values in panel order.
    pub pvalues: Vec<f64>,
    pub k_hat: usize,
    /// Selected panels (0-based), ascending.
    pub selected: Vec<usize>,
    pub nu_median: Option<f64>,
    pub nu_mean: Option<f64>,
}

/// p-value of a single CUSUM value.
#[inline]
pub fn pvalue(cusum: f64, delta: f64) -> f64 {
    (-delta * (cusum + RHO)).exp()
}

pub fn pvalues(report: &AlarmReport, delta: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!(
            "delta must be positive, got {delta}"
        )));
    }
    report
        .panel_stats
        .iter()
        .map(|s| {
            if s.cusum >= 0.0 {
                Ok(pvalue(s.cusum, delta))
            } else {
                Err(Error::Invariant(format!(
                    "panel {} has negative CUSUM value {}",
                    s.panel, s.cusum
                )))
            }
        })
        .collect()
}

/// Panel indices ordered by ascending p-value, ties by panel index.
fn ordered(pvalues: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pvalues.len()).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    order
}

/// Benjamini–Hochberg step-up selection with the strict rule
/// `p_(i) < α i / N`. The change-point aggregates are left empty; see
/// [`aggregate_changepoint`] or [`isolate`].
pub fn bh_select(pvalues: &[f64], alpha: f64) -> Result<IsolationResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if let Some(p) = pvalues.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::InvalidInput(format!("p-value {p} outside (0, 1]")));
    }
    let n = pvalues.len() as f64;
    let order = ordered(pvalues);
    let k_hat = order
        .iter()
        .enumerate()
        .rev()
        .find(|(rank, &panel)| pvalues[panel] < alpha * (rank + 1) as f64 / n)
        .map_or(0, |(rank, _)| rank + 1);
    let mut selected = order[..k_hat].to_vec();
    selected.sort_unstable();
    Ok(IsolationResult {
        pvalues: pvalues.to_vec(),
        k_hat,
        selected,
        nu_median: None,
        nu_mean: None,
    })
}

/// Interpolated median and mean of the selected panels' `ν̂_i`.
pub fn aggregate_changepoint(
    report: &AlarmReport,
    selection: &IsolationResult,
) -> (Option<f64>, Option<f64>) {
    let mut nus: Vec<f64> = selection
        .selected
        .iter()
        .map(|&i| report.panel_stats[i].nu_hat as f64)
        .collect();
    if nus.is_empty() {
        return (None, None);
    }
    nus.sort_by(f64::total_cmp);
    let k = nus.len();
    let median = if k % 2 == 1 {
        nus[k / 2]
    } else {
        0.5 * (nus[k / 2 - 1] + nus[k / 2])
    };
    let mean = nus.iter().sum::<f64>() / k as f64;
    (Some(median), Some(mean))
}

/// p-values, BH selection and change-point aggregates in one call.
pub fn isolate(report: &AlarmReport, delta: f64, alpha: f64) -> Result<IsolationResult> {
    let p = pvalues(report, delta)?;
    let mut result = bh_select(&p, alpha)?;
    let (median, mean) = aggregate_changepoint(report, &result);
    result.nu_median = median;
    result.nu_mean = mean;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::PanelStat;
    use approx::assert_relative_eq;

    fn report(cusums: &[f64], nus: &[u64]) -> AlarmReport {
        AlarmReport {
            tau: 200,
            global_sr: 1e6,
            panel_stats: cusums
                .iter()
                .zip(nus)
                .enumerate()
                .map(|(panel, (&cusum, &nu_hat))| PanelStat {
                    panel,
                    cusum,
                    nu_hat,
                    mu_hat: None,
                })
                .collect(),
        }
    }

    #[test]
    fn pvalue_formula() {
        assert_relative_eq!(pvalue(0.0, 0.5), (-0.2913_f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(pvalue(10.0, 0.5), (-5.2913_f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(pvalue(0.0, 0.5), 0.747_289, epsilon = 5e-6);
        assert_relative_eq!(pvalue(10.0, 0.5), 0.005_034, epsilon = 5e-6);
    }

    #[test]
    fn negative_cusum_is_invariant_violation() {
        let r = report(&[1.0, -0.1], &[0, 0]);
        assert!(matches!(pvalues(&r, 0.5), Err(Error::Invariant(_))));
    }

    #[test]
    fn step_up_worked_example() {
        let res = bh_select(&[0.9, 0.02, 0.2, 0.01], 0.2).unwrap();
        assert_eq!(res.k_hat, 2);
        assert_eq!(res.selected, vec![1, 3]);
    }

    #[test]
    fn nothing_selected() {
        let res = bh_select(&[0.99; 6], 0.2).unwrap();
        assert_eq!(res.k_hat, 0);
        assert!(res.selected.is_empty());
    }

    #[test]
    fn step_up_not_step_down() {
        // p_(1) fails but p_(2) passes: step-up selects both.
        let res = bh_select(&[0.06, 0.04], 0.1).unwrap();
        assert_eq!(res.k_hat, 2);
    }

    #[test]
    fn strict_inequality_at_boundary() {
        // 0.0625 = 0.25·1/4 exactly; the strict rule rejects it. Dyadic values keep
        // the threshold exact in floating point.
        let res = bh_select(&[0.0625, 0.5, 0.75, 1.0], 0.25).unwrap();
        assert_eq!(res.k_hat, 0);
        let res = bh_select(&[0.0624, 0.5, 0.75, 1.0], 0.25).unwrap();
        assert_eq!(res.k_hat, 1);
    }

    #[test]
    fn tied_pvalues_are_selected_together() {
        // Under step-up a tie can never straddle the cut.
        let res = bh_select(&[0.5, 0.02, 0.02, 0.02, 0.9], 0.1).unwrap();
        assert_eq!(res.k_hat, 3);
        assert_eq!(res.selected, vec![1, 2, 3]);
        let res = bh_select(&[0.5, 0.07, 0.07, 0.07, 0.9], 0.1).unwrap();
        assert_eq!(res.k_hat, 0);
    }

    #[test]
    fn alpha_and_pvalue_domain() {
        assert!(matches!(bh_select(&[0.1], 0.0), Err(Error::Config(_))));
        assert!(matches!(bh_select(&[0.1], 1.0), Err(Error::Config(_))));
        assert!(bh_select(&[0.0], 0.1).is_err());
        assert!(bh_select(&[1.5], 0.1).is_err());
    }

    #[test]
    fn aggregates() {
        let r = report(&[0.0; 4], &[98, 99, 101, 105]);
        let sel = IsolationResult {
            pvalues: vec![0.1; 4],
            k_hat: 4,
            selected: vec![0, 1, 2, 3],
            nu_median: None,
            nu_mean: None,
        };
        assert_eq!(aggregate_changepoint(&r, &sel), (Some(100.0), Some(100.75)));
        let one = IsolationResult {
            k_hat: 1,
            selected: vec![2],
            ..sel.clone()
        };
        let r = report(&[0.0; 4], &[1, 2, 97, 3]);
        assert_eq!(aggregate_changepoint(&r, &one), (Some(97.0), Some(97.0)));
        let none = IsolationResult {
            k_hat: 0,
            selected: vec![],
            ..sel
        };
        assert_eq!(aggregate_changepoint(&r, &none), (None, None));
    }

    #[test]
    fn even_count_gives_half_integer_median() {
        let r = report(&[0.0; 2], &[99, 100]);
        let sel = IsolationResult {
            pvalues: vec![0.1; 2],
            k_hat: 2,
            selected: vec![0, 1],
            nu_median: None,
            nu_mean: None,
        };
        assert_eq!(aggregate_changepoint(&r, &sel).0, Some(99.5));
    }

    #[test]
    fn isolate_end_to_end() {
        let r = report(&[12.0, 0.0, 0.3, 9.0], &[180, 200, 199, 185]);
        let res = isolate(&r, 0.5, 0.2).unwrap();
        assert_eq!(res.selected, vec![0, 3]);
        assert_eq!(res.nu_median, Some(182.5));
        assert_eq!(res.nu_mean, Some(182.5));
    }

    #[test]
    fn json_shape() {
        let r = report(&[12.0, 0.0], &[180, 200]);
        let res = isolate(&r, 0.5, 0.2).unwrap();
        let v: serde_json::Value = serde_json::to_value(&res).unwrap();
        for key in ["pvalues", "k_hat", "selected", "nu_median", "nu_mean"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["selected"], serde_json::json!([0]));
    }
}
