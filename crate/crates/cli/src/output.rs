use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Provenance record written next to every output file as
/// `<output>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool_version: String,
    /// SHA-256 over every input file's path and bytes, in read order.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub command: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// A file written via temp file and rename, or stdout.
pub struct Output {
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(path: Option<PathBuf>) -> Self {
        Output { path }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn write(&self, bytes: &[u8]) -> Result<(), CliError> {
        match &self.path {
            Some(path) => write_atomic(path, bytes),
            None => std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::Runtime(format!("stdout: {e}"))),
        }
    }

    pub fn write_manifest(output: &Path, manifest: &Manifest) -> Result<(), CliError> {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        let mut json = serde_json::to_string_pretty(manifest)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        json.push('\n');
        write_atomic(Path::new(&name), json.as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Runtime(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(bytes).map_err(|e| fail(&e))?;
    tmp.flush().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}
