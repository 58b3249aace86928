//! Config files. TOML by default; files ending in `.json` are read as JSON.

use crate::error::{CliError, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use srcusum_core::Scenario;
use std::path::Path;

pub fn load_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |message: String| CliError::ConfigFile {
        path: path.to_path_buf(),
        message,
    };
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| bad(e.to_string().trim_end().to_string()))
    }
}

fn decode<T: DeserializeOwned>(path: &Path, value: Value, context: &str) -> Result<T> {
    serde_json::from_value(value).map_err(|e| CliError::ConfigFile {
        path: path.to_path_buf(),
        message: format!("{context}{e}"),
    })
}

/// Detector settings shared by `calibrate` and `detect`. Every field can be
/// overridden on the command line.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorFile {
    pub delta: Option<f64>,
    pub n_panels: Option<usize>,
    pub alarm_limit: Option<f64>,
    pub target_arl0: Option<f64>,
    pub alpha: Option<f64>,
}

impl DetectorFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => decode(p, load_value(p)?, ""),
        }
    }
}

/// Expands a simulation config into scenarios.
///
/// Either the whole file is one scenario, or it holds a `[defaults]` table
/// and a `[[scenario]]` array whose entries override the defaults.
pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let value = load_value(path)?;
    let bad = |message: String| CliError::ConfigFile {
        path: path.to_path_buf(),
        message,
    };
    let Value::Object(mut root) = value else {
        return Err(bad("expected a table at the top level".into()));
    };
    let Some(list) = root.remove("scenario") else {
        return Ok(vec![decode(path, Value::Object(root), "")?]);
    };
    let defaults = match root.remove("defaults") {
        None => Map::new(),
        Some(Value::Object(m)) => m,
        Some(_) => return Err(bad("`defaults` must be a table".into())),
    };
    if let Some(key) = root.keys().next() {
        return Err(bad(format!(
            "unknown top-level key `{key}`; expected `defaults` and `scenario`"
        )));
    }
    let Value::Array(entries) = list else {
        return Err(bad("`scenario` must be an array of tables".into()));
    };
    if entries.is_empty() {
        return Err(bad("`scenario` is empty".into()));
    }
    entries
        .into_iter()
        .enumerate()
        .map(|(i, entry)| {
            let Value::Object(fields) = entry else {
                return Err(bad(format!("scenario {}: expected a table", i + 1)));
            };
            let mut merged = defaults.clone();
            merged.extend(fields);
            let name = match merged.get("label") {
                Some(Value::String(l)) => format!("scenario {} ({l}): ", i + 1),
                _ => format!("scenario {}: ", i + 1),
            };
            let s: Scenario = decode(path, Value::Object(merged), &name)?;
            s.validate().map_err(|e| bad(format!("{name}{e}")))?;
            Ok(s)
        })
        .collect()
}
