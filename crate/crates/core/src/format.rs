//! JSON output with reals rounded to 12 significant digits, scenario files,
//! and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scenario::{ScenarioOrigin, ScenarioSet};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Rounds every float in `value` in place. Integers are left alone.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes with rounded reals; `indent = None` gives compact output.
pub fn to_report_json<T: Serialize>(value: &T, indent: Option<usize>) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    to_json_string(&v, indent)
}

/// Serializes at full precision.
pub fn to_json_string<T: Serialize>(value: &T, indent: Option<usize>) -> Result<String> {
    match indent {
        None => Ok(serde_json::to_string(value)?),
        Some(width) => {
            let pad = vec![b' '; width];
            let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
            let mut buf = Vec::new();
            let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
            value.serialize(&mut ser)?;
            Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
        }
    }
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io_err)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(contents).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

/// On-disk form of a scenario set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile<S> {
    pub problem: String,
    pub scenarios: Vec<S>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sampler: Option<String>,
}

pub fn scenario_file_json<S: Serialize + Clone>(
    problem: &str,
    set: &ScenarioSet<S>,
    indent: Option<usize>,
) -> Result<String> {
    let file = ScenarioFile {
        problem: problem.to_string(),
        scenarios: set.payloads().cloned().collect(),
        seed: set.origin.seed,
        sampler: set.origin.sampler.clone(),
    };
    to_json_string(&file, indent)
}

pub fn save_scenarios<S: Serialize + Clone>(
    path: &Path,
    problem: &str,
    set: &ScenarioSet<S>,
    indent: Option<usize>,
) -> Result<()> {
    let text = scenario_file_json(problem, set, indent)?;
    write_atomic(path, text.as_bytes())
}

/// Parses a scenario file; schema errors name the offending field.
pub fn parse_scenarios<S: DeserializeOwned>(
    text: &str,
    path: &Path,
    expected_problem: &str,
) -> Result<ScenarioSet<S>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile<S> = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Error::Schema {
            path: path.to_path_buf(),
            field,
            message: e.into_inner().to_string(),
        }
    })?;
    if file.problem != expected_problem {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            field: "problem".into(),
            message: format!("expected `{expected_problem}`, found `{}`", file.problem),
        });
    }
    if file.scenarios.is_empty() {
        return Err(Error::domain(format!(
            "{}: scenario list is empty (at least one scenario is required)",
            path.display()
        )));
    }
    Ok(ScenarioSet::new(
        file.scenarios,
        ScenarioOrigin {
            seed: file.seed,
            sampler: file.sampler,
            path: Some(path.to_path_buf()),
        },
    ))
}

pub fn load_scenarios<S: DeserializeOwned>(
    path: &Path,
    expected_problem: &str,
) -> Result<ScenarioSet<S>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenarios(&text, path, expected_problem)
}

/// Writes `report` as rounded JSON.
pub fn save_report<T: Serialize>(report: &T, path: &Path, indent: Option<usize>) -> Result<()> {
    let mut text = to_report_json(report, indent)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
