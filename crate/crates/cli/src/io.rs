//! File plumbing: hashed reads, staged atomic writes and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sumlab_core::GridSet;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub invocation: serde_json::Value,
}

/// Every JSON report: the producing configuration plus the payload.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report<T> {
    pub config: RunConfig,
    pub result: T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("writing into {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

/// Collects inputs and outputs of one run; nothing touches disk until
/// [`Session::commit`].
pub struct Session {
    pub config: RunConfig,
    inputs: Vec<FileHash>,
    outputs: Vec<(PathBuf, Vec<u8>)>,
    manifest: Option<PathBuf>,
}

impl Session {
    pub fn new(config: RunConfig) -> Self {
        Session { config, inputs: Vec::new(), outputs: Vec::new(), manifest: None }
    }

    pub fn read_bytes(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(FileHash { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(bytes)
    }

    pub fn read_json<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T> {
        let bytes = self.read_bytes(path)?;
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn read_set(&mut self, path: &Path) -> Result<GridSet> {
        self.read_json(path)
    }

    pub fn stage(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.outputs.push((path, bytes));
    }

    pub fn stage_json<T: Serialize>(&mut self, path: PathBuf, v: &T) -> Result<()> {
        self.stage(path, to_json(v)?);
        Ok(())
    }

    pub fn stage_report<T: Serialize>(&mut self, path: PathBuf, result: T) -> Result<()> {
        let report = Report { config: self.config.clone(), result };
        self.stage_json(path, &report)
    }

    /// Put the manifest at this path instead of next to the first output.
    pub fn manifest_at(&mut self, path: PathBuf) {
        self.manifest = Some(path);
    }

    pub fn report_bytes<T: Serialize>(&self, result: T) -> Result<Vec<u8>> {
        to_json(&Report { config: self.config.clone(), result })
    }

    /// Write staged outputs, then the manifest describing them.
    pub fn commit(self) -> Result<()> {
        let Some((first, _)) = self.outputs.first() else {
            return Ok(());
        };
        let manifest_path = self.manifest.clone().unwrap_or_else(|| {
            let mut s = first.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        });
        let mut outputs = Vec::new();
        for (path, bytes) in &self.outputs {
            write_atomic(path, bytes)?;
            outputs.push(FileHash { path: path.display().to_string(), sha256: sha256_hex(bytes) });
        }
        let manifest = Manifest { config: self.config, inputs: self.inputs, outputs };
        write_atomic(&manifest_path, &to_json(&manifest)?)
    }
}
