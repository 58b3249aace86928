use crate::config::DetectorFile;
use crate::error::{CliError, Result};
use crate::output::{csv_table, emit, json, num};
use crate::{CalibrateArgs, Format};
use serde::Serialize;
use srcusum_core::calibrate_limit;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub delta: f64,
    pub n_panels: usize,
    pub target_arl0: f64,
    pub alarm_limit: f64,
}

pub fn compute(args: &CalibrateArgs) -> Result<Calibration> {
    let file = DetectorFile::load(args.detector.config.as_deref())?;
    let need = |name: &str| CliError::Usage(format!("calibrate needs {name}"));
    let delta = args
        .detector
        .delta
        .or(file.delta)
        .ok_or_else(|| need("--delta"))?;
    let n_panels = args
        .detector
        .panels
        .or(file.n_panels)
        .ok_or_else(|| need("--panels"))?;
    let target_arl0 = args
        .detector
        .arl0
        .or(file.target_arl0)
        .ok_or_else(|| need("--arl0"))?;
    let alarm_limit = calibrate_limit(delta, n_panels, target_arl0)?;
    Ok(Calibration {
        delta,
        n_panels,
        target_arl0,
        alarm_limit,
    })
}

pub fn run(args: &CalibrateArgs) -> Result<()> {
    let c = compute(args)?;
    let text = match args.format {
        Format::Json => json(&c),
        Format::Csv => csv_table(
            &["delta", "n_panels", "target_arl0", "alarm_limit"],
            &[vec![
                num(c.delta),
                c.n_panels.to_string(),
                num(c.target_arl0),
                num(c.alarm_limit),
            ]],
        )?,
    };
    emit(args.out.as_deref(), &text)
}
