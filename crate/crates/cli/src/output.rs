use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;

/// Record written next to every artifact a command produces.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub artifacts: Vec<PathBuf>,
    pub duration_secs: f64,
}

/// `results/curve.csv` -> `results/curve.manifest.json`.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    artifact.with_extension("manifest.json")
}

pub fn write_manifest<P: Serialize>(
    command: &str,
    params: &P,
    seed: Option<u64>,
    artifacts: &[&Path],
    elapsed: Duration,
) -> Result<PathBuf> {
    let primary = artifacts.first().context("manifest needs at least one artifact")?;
    let manifest = RunManifest {
        command: command.to_string(),
        params: serde_json::to_value(params)?,
        seed,
        artifacts: artifacts.iter().map(|p| p.to_path_buf()).collect(),
        duration_secs: elapsed.as_secs_f64(),
    };
    let path = manifest_path(primary);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
