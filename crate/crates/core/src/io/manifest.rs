//! Run manifests: config echo, version, seed, timestamps and file hashes.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::IoError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Config echo as ordered `(key, value)` pairs.
    pub config: Vec<(String, String)>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub files: Vec<FileEntry>,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    /// Starts a manifest; the start time is taken now.
    pub fn new(command: &str, seed: u64, config: Vec<(String, String)>) -> Self {
        Self {
            tool: "pdmp-axon".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            started_unix: now(),
            finished_unix: 0.0,
            files: Vec::new(),
        }
    }

    /// Hashes `dir/name` and records it.
    pub fn add_file(&mut self, dir: &Path, name: &str) -> Result<(), IoError> {
        let bytes = fs::read(dir.join(name))?;
        self.files.push(FileEntry {
            name: name.into(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Stamps the finish time and writes `dir/manifest.json`.
    pub fn finish(mut self, dir: &Path) -> Result<Self, IoError> {
        self.finished_unix = now();
        let json =
            serde_json::to_string_pretty(&self).map_err(|e| IoError::Format(e.to_string()))?;
        fs::write(dir.join(MANIFEST_NAME), json + "\n")?;
        Ok(self)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| IoError::Format(e.to_string()))
    }

    /// Names of the listed files whose size or hash no longer matches, relative
    /// to `dir`. Missing files count as mismatches.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| match fs::read(dir.join(&f.name)) {
                Ok(bytes) => bytes.len() as u64 != f.bytes || sha256_hex(&bytes) != f.sha256,
                Err(_) => true,
            })
            .map(|f| f.name.clone())
            .collect()
    }
}

/// Loads `dir/manifest.json` and verifies it.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, IoError> {
    Ok(RunManifest::load(&dir.join(MANIFEST_NAME))?.verify(dir))
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

    #[test]
    fn verify_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.csv"), "1,2\n").unwrap();
        let mut m = RunManifest::new("simulate", 3, vec![("eps".into(), "1".into())]);
        m.add_file(dir.path(), "a.csv").unwrap();
        let m = m.finish(dir.path()).unwrap();
        assert!(m.finished_unix >= m.started_unix);
        assert!(verify_manifest(dir.path()).unwrap().is_empty());
        assert_eq!(
            RunManifest::load(&dir.path().join(MANIFEST_NAME)).unwrap(),
            m
        );
        fs::write(dir.path().join("a.csv"), "1,3\n").unwrap();
        assert_eq!(
            verify_manifest(dir.path()).unwrap(),
            vec!["a.csv".to_string()]
        );
    }
}
