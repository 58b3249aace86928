use crate::config::load_scenarios;
use crate::error::{CliError, Result};
use crate::output::{csv_table, emit, json, num, opt};
use crate::{Format, SimulateArgs};
use serde::Serialize;
use srcusum_core::sim::Estimate;
use srcusum_core::{run_experiment, Scenario, ScenarioMetrics};
use std::time::Instant;

pub const CSV_HEADER: [&str; 31] = [
    "label",
    "n_panels",
    "k_changed",
    "nu",
    "mu",
    "delta",
    "target_arl0",
    "alarm_limit",
    "replications",
    "effective",
    "censored",
    "false_alarms",
    "far",
    "far_se",
    "cadt",
    "cadt_se",
    "alpha",
    "fdr",
    "fdr_se",
    "fdr_bound",
    "fnr",
    "fnr_se",
    "median_bias",
    "median_bias_se",
    "median_bias_median",
    "mean_bias",
    "mean_bias_se",
    "mean_bias_median",
    "e_k_hat",
    "e_k_hat_se",
    "seed",
];

#[derive(Debug, Serialize)]
pub struct SimulationOutput {
    pub scenarios: Vec<ScenarioMetrics>,
}

pub fn scenarios(args: &SimulateArgs) -> Result<Vec<Scenario>> {
    let mut list = load_scenarios(&args.config)?;
    if let Some(seed) = args.seed {
        for s in &mut list {
            s.seed = seed;
        }
    }
    Ok(list)
}

pub fn csv_rows(metrics: &[ScenarioMetrics]) -> Vec<Vec<String>> {
    let mean = |e: &Option<Estimate>| opt(e.as_ref().map(|e| e.mean));
    let se = |e: &Option<Estimate>| opt(e.as_ref().and_then(|e| e.se));
    let mut rows = Vec::new();
    for m in metrics {
        let s = &m.scenario;
        for a in &m.per_alpha {
            rows.push(vec![
                s.label.clone().unwrap_or_default(),
                s.n_panels.to_string(),
                s.k_changed.to_string(),
                s.nu.to_string(),
                num(s.mu),
                num(s.delta),
                num(s.target_arl0),
                num(m.alarm_limit),
                m.replications.to_string(),
                m.effective_count.to_string(),
                m.censored_count.to_string(),
                m.false_alarm_count.to_string(),
                num(m.far.mean),
                opt(m.far.se),
                num(m.cadt.mean),
                opt(m.cadt.se),
                num(a.alpha),
                num(a.fdr.mean),
                opt(a.fdr.se),
                num(a.fdr_bound),
                mean(&a.fnr),
                se(&a.fnr),
                mean(&a.median_bias),
                se(&a.median_bias),
                opt(a.median_bias_median),
                mean(&a.mean_bias),
                se(&a.mean_bias),
                opt(a.mean_bias_median),
                num(a.e_k_hat.mean),
                opt(a.e_k_hat.se),
                s.seed.to_string(),
            ]);
        }
    }
    rows
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let list = scenarios(args)?;
    if args.dry_run {
        return emit(None, &json(&list));
    }
    let mut metrics = Vec::with_capacity(list.len());
    for s in &list {
        let start = Instant::now();
        let m = run_experiment(s)?;
        eprintln!(
            "{}: {} replications, {} effective, {} censored, {:.1}s",
            s.label.as_deref().unwrap_or("scenario"),
            m.replications,
            m.effective_count,
            m.censored_count,
            start.elapsed().as_secs_f64()
        );
        metrics.push(m);
    }
    let out = SimulationOutput { scenarios: metrics };
    match (args.format, args.out.as_deref()) {
        (Format::Json, path) => emit(path, &json(&out)),
        (Format::Csv, None) => emit(None, &csv_table(&CSV_HEADER, &csv_rows(&out.scenarios))?),
        (Format::Csv, Some(path)) => {
            let sidecar = path.with_extension("json");
            if sidecar == path {
                return Err(CliError::Usage(
                    "--format csv writes a .json file next to --out; pick an --out without the .json extension"
                        .into(),
                ));
            }
            emit(
                Some(path),
                &csv_table(&CSV_HEADER, &csv_rows(&out.scenarios))?,
            )?;
            emit(Some(&sidecar), &json(&out))
        }
    }
}
