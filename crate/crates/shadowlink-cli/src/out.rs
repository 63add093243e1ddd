//! Output plumbing: stable numeric formatting, atomic file writes, and the
//! run manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Formats a float with 6 significant digits in plain decimal notation.
/// Keeps golden files stable across platforms and spares consumers from
/// 17-digit float noise.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{:.5e}", x);
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // Trim trailing zeros but keep at least one digit after the point.
    if s.contains('.') {
        let t = s.trim_end_matches('0');
        let t = t.strip_suffix('.').unwrap_or(t);
        t.to_string()
    } else {
        s
    }
}

/// Writes bytes to `path` via a temporary file plus rename, so failures
/// never leave partial outputs behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Reproducibility record of one command invocation. The digest covers the
/// command, its arguments, the seed, and every input file's bytes; no
/// timestamps, so identical runs produce identical manifests.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

pub struct ManifestBuilder {
    command: String,
    hasher: Sha256,
    seed: u64,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update(seed.to_le_bytes());
        Self {
            command: command.to_string(),
            hasher,
            seed,
            outputs: Vec::new(),
        }
    }

    /// Folds an argument that affects outputs into the digest.
    pub fn arg(&mut self, name: &str, value: impl std::fmt::Display) -> &mut Self {
        self.hasher.update(name.as_bytes());
        self.hasher.update(value.to_string().as_bytes());
        self
    }

    /// Folds an input file's raw bytes into the digest.
    pub fn input_file(&mut self, path: &Path) -> io::Result<&mut Self> {
        self.hasher.update(path.file_name().unwrap_or_default().as_encoded_bytes());
        self.hasher.update(fs::read(path)?);
        Ok(self)
    }

    pub fn output(&mut self, name: &str) -> &mut Self {
        self.outputs.push(name.to_string());
        self
    }

    /// Writes `manifest.json` into `out_dir`.
    pub fn write(self, out_dir: &Path) -> io::Result<PathBuf> {
        let digest: String = self
            .hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        let manifest = RunManifest {
            command: self.command,
            config_digest: digest,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs,
        };
        let path = out_dir.join("manifest.json");
        let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        body.push('\n');
        write_atomic(&path, body.as_bytes())?;
        Ok(path)
    }
}
