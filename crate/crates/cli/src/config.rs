use std::path::{Path, PathBuf};

use scenario_cert::cdf::ThresholdGrid;
use scenario_cert::problems::ConicSector;
use serde::Serialize;

use crate::args::Mode;
use crate::error::{CliError, CliResult};

/// Default output directory for relative and omitted `--out` paths.
pub const OUT_DIR_ENV: &str = "SCENARIO_CERT_OUT_DIR";

/// Everything that determines a run's outputs. Echoed into the manifest.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub prune: bool,
    pub nested: bool,
    pub nondegenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector: Option<ConicSector>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sector_sweep: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(command: &str, out: PathBuf) -> Self {
        RunConfig {
            command: command.to_string(),
            out,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(CliError::config(format!(
                    "--beta must lie in (0, 1), got {beta}"
                )));
            }
        }
        if self.n == Some(0) {
            return Err(CliError::config("--n must be at least 1"));
        }
        if let (Some(k), Some(n)) = (self.k, self.n) {
            if k > n {
                return Err(CliError::config(format!("--k {k} exceeds --n {n}")));
            }
        }
        if let Some(rho) = self.rho {
            if !(rho.is_finite() && rho > 0.0) {
                return Err(CliError::config(format!(
                    "--rho must be positive, got {rho}"
                )));
            }
        }
        if let Some(level) = self.level {
            if !level.is_finite() {
                return Err(CliError::config("--level must be finite"));
            }
        }
        if let Some(grid) = &self.grid {
            parse_grid(grid)?;
        }
        Ok(())
    }
}

/// `max_real:min_damping`.
pub fn parse_sector(text: &str) -> CliResult<ConicSector> {
    let (a, b) = text.split_once(':').ok_or_else(|| {
        CliError::config(format!("sector `{text}` is not `max_real:min_damping`"))
    })?;
    let max_real = parse_f64(a, "sector")?;
    let min_damping = parse_f64(b, "sector")?;
    Ok(ConicSector::new(max_real, min_damping)?)
}

pub fn parse_sweep(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|v| parse_f64(v, "sector sweep"))
        .collect()
}

/// `lo:hi:count`, or a path to a JSON array of levels.
pub fn parse_grid(text: &str) -> CliResult<ThresholdGrid> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let lo = parse_f64(parts[0], "grid")?;
        let hi = parse_f64(parts[1], "grid")?;
        let count: usize = parts[2].trim().parse().map_err(|_| {
            CliError::config(format!("grid count `{}` is not an integer", parts[2]))
        })?;
        return Ok(ThresholdGrid::uniform(lo, hi, count)?);
    }
    let path = Path::new(text);
    let raw = std::fs::read_to_string(path).map_err(|source| scenario_cert::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let levels: Vec<f64> = serde_json::from_str(&raw).map_err(|e| {
        CliError::config(format!(
            "{}: expected a JSON array of levels: {e}",
            path.display()
        ))
    })?;
    Ok(ThresholdGrid::new(levels)?)
}

fn parse_f64(text: &str, what: &str) -> CliResult<f64> {
    text.trim()
        .parse()
        .map_err(|_| CliError::config(format!("{what}: `{text}` is not a number")))
}

/// Resolves `--out` against the output directory variable.
pub fn output_path(out: Option<&Path>, default_name: &str) -> PathBuf {
    let base = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match (out, base) {
        (Some(p), _) if p.is_absolute() => p.to_path_buf(),
        (Some(p), Some(dir)) => dir.join(p),
        (Some(p), None) => p.to_path_buf(),
        (None, Some(dir)) => dir.join(default_name),
        (None, None) => PathBuf::from(default_name),
    }
}

/// `report.json` -> `report.<suffix>`.
pub fn companion(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}
