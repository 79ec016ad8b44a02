use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Artifact directory that can undo its own writes.
pub struct OutDir {
    root: PathBuf,
    created: bool,
    before: BTreeSet<PathBuf>,
    written: Vec<String>,
}

impl OutDir {
    pub fn open(root: &Path) -> Result<Self> {
        let created = !root.exists();
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        let before = fs::read_dir(root)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
        Ok(OutDir { root: root.to_path_buf(), created, before, written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
        self.note(name);
        Ok(())
    }

    /// Record a file written by someone else.
    pub fn note(&mut self, name: &str) {
        self.written.push(name.to_string());
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Remove everything this run added.
    pub fn discard(self) {
        if self.created {
            let _ = fs::remove_dir_all(&self.root);
            return;
        }
        if let Ok(rd) = fs::read_dir(&self.root) {
            for p in rd.flatten().map(|e| e.path()).filter(|p| !self.before.contains(p)) {
                let _ = if p.is_dir() { fs::remove_dir_all(&p) } else { fs::remove_file(&p) };
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

pub fn input_record(path: &Path) -> Result<InputRecord> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InputRecord { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub argv: &'a [String],
    pub verb: &'a str,
    pub seed: u64,
    pub threads: Option<usize>,
    pub inputs: &'a [InputRecord],
    pub outputs: Vec<String>,
    pub passed: bool,
    pub timestamp_unix: u64,
}

pub fn timestamp() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
