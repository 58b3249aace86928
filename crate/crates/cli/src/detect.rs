use crate::config::DetectorFile;
use crate::error::{CliError, Result};
use crate::output::{emit, json};
use crate::stream::StreamReader;
use crate::DetectArgs;
use serde::Serialize;
use srcusum_core::{isolate, AlarmReport, Detector, DetectorConfig, IsolationResult, PanelState};
use std::io::Read;
use std::path::Path;

/// Panel statistics at the end of a stream that never raised the alarm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalState {
    pub t: u64,
    pub global_sr: f64,
    pub panels: Vec<PanelState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectOutput {
    pub alarm: bool,
    pub rows_read: u64,
    pub config: DetectorConfig,
    pub report: Option<AlarmReport>,
    pub isolation: Option<IsolationResult>,
    pub final_state: Option<FinalState>,
}

fn open(path: &Path) -> Result<(Box<dyn Read>, String)> {
    if path.as_os_str() == "-" {
        return Ok((Box::new(std::io::stdin().lock()), "<stdin>".into()));
    }
    let f = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((
        Box::new(std::io::BufReader::new(f)),
        path.display().to_string(),
    ))
}

/// Builds the detector config from flags over the config file; the panel
/// count falls back to the stream width.
pub fn resolve_config(args: &DetectArgs, width: usize) -> Result<DetectorConfig> {
    let file = DetectorFile::load(args.detector.config.as_deref())?;
    let delta = args
        .detector
        .delta
        .or(file.delta)
        .ok_or_else(|| CliError::Usage("detect needs --delta".into()))?;
    let alpha = args
        .alpha
        .or(file.alpha)
        .ok_or_else(|| CliError::Usage("detect needs --alpha".into()))?;
    let n = args.detector.panels.or(file.n_panels).unwrap_or(width);
    let limit = args.limit.or(file.alarm_limit);
    let arl0 = args.detector.arl0.or(file.target_arl0);
    if limit.is_none() && arl0.is_none() {
        return Err(CliError::Usage("detect needs --limit or --arl0".into()));
    }
    Ok(DetectorConfig::new(delta, n, limit, arl0, alpha)?)
}

pub fn detect_stream<R: Read>(
    args: &DetectArgs,
    mut reader: StreamReader<R>,
) -> Result<DetectOutput> {
    let Some(width) = reader.width() else {
        return Err(CliError::EmptyInput {
            source_name: reader.source_name().to_string(),
        });
    };
    let config = resolve_config(args, width)?;
    reader.expect_width(config.n_panels)?;
    let mut detector = Detector::new(config.clone())?;
    let mut rows_read = 0;
    let mut alarm = false;
    while let Some((_, row)) = reader.next_row()? {
        rows_read += 1;
        if detector.step(&row)? {
            alarm = true;
            break;
        }
    }
    if rows_read == 0 {
        return Err(CliError::EmptyInput {
            source_name: reader.source_name().to_string(),
        });
    }
    if alarm {
        let report = detector.report()?;
        let isolation = isolate(&report, config.delta, config.fdr_level)?;
        Ok(DetectOutput {
            alarm,
            rows_read,
            config,
            report: Some(report),
            isolation: Some(isolation),
            final_state: None,
        })
    } else {
        Ok(DetectOutput {
            alarm,
            rows_read,
            final_state: Some(FinalState {
                t: detector.t(),
                global_sr: detector.global_sr(),
                panels: detector.panels().to_vec(),
            }),
            config,
            report: None,
            isolation: None,
        })
    }
}

pub fn run(args: &DetectArgs) -> Result<()> {
    let (input, name) = open(&args.input)?;
    let reader = StreamReader::new(input, name)?;
    let out = detect_stream(args, reader)?;
    emit(args.out.as_deref(), &json(&out))
}
