//! Run manifest: config hash, task statuses, hashes of every output file.

use std::path::Path;
use std::time::SystemTime;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::tasks::TaskReport;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_path: String,
    pub config_sha256: String,
    pub started: String,
    pub finished: String,
    pub threads: usize,
    pub status: &'static str,
    pub tasks: Vec<TaskReport>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn timestamp(t: SystemTime) -> String {
    humantime::format_rfc3339_seconds(t).to_string()
}

/// Hashes the listed files, sorted by path.
pub fn file_entries(dir: &Path, files: &[impl AsRef<Path>]) -> anyhow::Result<Vec<FileEntry>> {
    let mut out = Vec::new();
    for f in files {
        let f = f.as_ref();
        let bytes = std::fs::read(dir.join(f)).with_context(|| format!("hashing {}", f.display()))?;
        out.push(FileEntry {
            path: f.display().to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    out.dedup_by(|a, b| a.path == b.path);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn rfc3339_format() {
        assert_eq!(timestamp(SystemTime::UNIX_EPOCH), "1970-01-01T00:00:00Z");
    }
}
