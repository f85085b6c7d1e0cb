use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use scenario_cert::format::{to_json_string, write_atomic};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{companion, RunConfig};
use crate::error::CliResult;

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub cli: &'static str,
    pub library: &'static str,
}

/// Side record of a run. The only output that carries wall-clock data.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub artifacts: Vec<Artifact>,
    pub versions: Versions,
    pub stages: Vec<StageTime>,
    pub started_unix: f64,
    pub finished_unix: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Collects artifacts and stage timings while a command runs.
pub struct Recorder {
    started: f64,
    artifacts: Vec<Artifact>,
    stages: Vec<StageTime>,
}

impl Recorder {
    pub fn start() -> Self {
        Recorder {
            started: unix_now(),
            artifacts: Vec::new(),
            stages: Vec::new(),
        }
    }

    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.push(StageTime {
            stage: name.to_string(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }

    /// Writes `contents` atomically and records its hash.
    pub fn write(&mut self, path: &Path, contents: &[u8]) -> CliResult<()> {
        write_atomic(path, contents)?;
        self.artifacts.push(Artifact {
            path: path.to_path_buf(),
            sha256: sha256_hex(contents),
            bytes: contents.len(),
        });
        Ok(())
    }

    /// Writes `<out>.manifest.json` next to the primary output.
    pub fn finish(self, config: RunConfig, indent: Option<usize>) -> CliResult<PathBuf> {
        let path = companion(&config.out, "manifest.json");
        let manifest = RunManifest {
            config,
            artifacts: self.artifacts,
            versions: Versions {
                cli: env!("CARGO_PKG_VERSION"),
                library: scenario_cert::VERSION,
            },
            stages: self.stages,
            started_unix: self.started,
            finished_unix: unix_now(),
        };
        let mut text = to_json_string(&manifest, indent)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
