use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(root: &Path, path: &Path) -> CliResult<Self> {
        let data = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let rel = path.strip_prefix(root).unwrap_or(path);
        Ok(FileDigest {
            path: rel.to_string_lossy().replace('\\', "/"),
            sha256: format!("{:x}", Sha256::digest(&data)),
            bytes: data.len() as u64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub inputs: Vec<FileDigest>,
    pub artifacts: Vec<FileDigest>,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: u64,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn manifest_path(out: &Path, command: &str) -> PathBuf {
    out.join(format!("manifest-{command}.json"))
}

/// Tracks one command's files and writes its manifest at the end.
#[derive(Debug)]
pub struct Recorder {
    out: PathBuf,
    command: String,
    started_at: u64,
    inputs: Vec<PathBuf>,
    artifacts: Vec<PathBuf>,
}

impl Recorder {
    /// Removes any manifest left by an earlier run of the same command.
    pub fn start(out: &Path, command: &str) -> CliResult<Self> {
        let path = manifest_path(out, command);
        match std::fs::remove_file(&path) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(CliError::io(&path, e)),
        }
        Ok(Recorder {
            out: out.to_path_buf(),
            command: command.to_string(),
            started_at: unix_now(),
            inputs: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    pub fn input(&mut self, path: PathBuf) {
        self.inputs.push(path);
    }

    pub fn artifact(&mut self, path: PathBuf) {
        self.artifacts.push(path);
    }

    pub fn finish(self, config: &ExperimentConfig) -> CliResult<RunManifest> {
        let digest = |paths: &[PathBuf]| -> CliResult<Vec<FileDigest>> {
            paths.iter().map(|p| FileDigest::of(&self.out, p)).collect()
        };
        let manifest = RunManifest {
            command: self.command.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            inputs: digest(&self.inputs)?,
            artifacts: digest(&self.artifacts)?,
            started_at: self.started_at,
            finished_at: unix_now(),
        };
        let path = manifest_path(&self.out, &self.command);
        let text = serde_json::to_string_pretty(&manifest).map_err(tivc_core::Error::from)?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

/// Recomputes every digest in a manifest; returns the paths that differ.
pub fn verify(out: &Path, manifest: &RunManifest) -> CliResult<Vec<String>> {
    let mut bad = Vec::new();
    for d in manifest.inputs.iter().chain(&manifest.artifacts) {
        let now = FileDigest::of(out, &out.join(&d.path))?;
        if now != *d {
            bad.push(d.path.clone());
        }
    }
    Ok(bad)
}
