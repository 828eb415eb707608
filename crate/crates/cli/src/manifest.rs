//! Run manifests: what a run produced, with content hashes so reruns can be
//! compared byte for byte. The manifest is always the last file written; a
//! failed run still gets one recording the failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// FNV-1a, 64-bit. An integrity/idempotence fingerprint, not a cryptographic
/// hash.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[derive(Debug, Clone)]
pub struct ArtifactRecord {
    pub name: String,
    pub bytes: u64,
    pub fnv1a: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub experiment: String,
    pub config_path: String,
    pub config_fnv1a: u64,
    /// Verbatim copy of the configuration that produced the run.
    pub config_echo: String,
    pub resolved: Vec<(String, String)>,
    pub artifacts: Vec<ArtifactRecord>,
    pub warnings: Vec<String>,
    pub timings: Vec<(String, Duration)>,
    pub failure: Option<String>,
}

impl RunManifest {
    pub fn note_resolved(&mut self, key: &str, value: impl Into<String>) {
        self.resolved.push((key.to_string(), value.into()));
    }

    pub fn record_artifact(&mut self, path: &Path, bytes: &[u8]) {
        self.artifacts.push(ArtifactRecord {
            name: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            bytes: bytes.len() as u64,
            fnv1a: fnv1a_64(bytes),
        });
    }

    pub fn push_warnings<'a>(&mut self, scope: &str, notes: impl IntoIterator<Item = &'a String>) {
        for note in notes {
            self.warnings.push(format!("{scope}: {note}"));
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "manifest_version = 1");
        let _ = writeln!(out, "tool_version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "experiment = {}", self.experiment);
        let _ = writeln!(out, "config = {}", self.config_path);
        let _ = writeln!(out, "config_fnv1a = {:016x}", self.config_fnv1a);
        let _ = writeln!(
            out,
            "status = {}",
            if self.failure.is_some() { "failed" } else { "ok" }
        );
        if let Some(reason) = &self.failure {
            let _ = writeln!(out, "failure = {reason}");
        }
        let _ = writeln!(out, "\n[resolved]");
        for (key, value) in &self.resolved {
            let _ = writeln!(out, "{key} = {value}");
        }
        let _ = writeln!(out, "\n[artifacts]");
        for artifact in &self.artifacts {
            let _ = writeln!(
                out,
                "{} = fnv1a:{:016x}, bytes:{}",
                artifact.name, artifact.fnv1a, artifact.bytes
            );
        }
        let _ = writeln!(out, "\n[timings]");
        for (name, duration) in &self.timings {
            let _ = writeln!(out, "{name} = {:.3} s", duration.as_secs_f64());
        }
        let _ = writeln!(out, "\n[warnings]");
        for (i, warning) in self.warnings.iter().enumerate() {
            let _ = writeln!(out, "warning_{i} = {warning}");
        }
        let _ = writeln!(out, "\n[config_echo]");
        for line in self.config_echo.lines() {
            let _ = writeln!(out, "| {line}");
        }
        out
    }
}

/// Write via a temp file in the target directory plus an atomic rename, so an
/// interrupted run never leaves a truncated artifact under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let tmp: PathBuf = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "artifact".to_string()),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    match std::fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            std::fs::remove_file(&tmp).ok();
            Err(e)
        }
    }
}
