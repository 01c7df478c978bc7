use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to re-run an output: the command, its full
/// configuration, the seed and the code version. No timestamps, so equal
/// runs hash equally.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            tool: "spatial-gibbs".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Hex SHA-256 of the serialized manifest.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Write `manifest.json` into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_FILE);
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = Manifest::new("sweep", Some(1), serde_json::json!({"b": [0.3], "n": 4}));
        let b = Manifest::new("sweep", Some(1), serde_json::json!({"n": 4, "b": [0.3]}));
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = Manifest::new("sweep", Some(2), serde_json::json!({"b": [0.3], "n": 4}));
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest::new("ldp", None, serde_json::json!({}));
        let path = m.write_to(&dir.path().join("nested")).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.contains("\"command\": \"ldp\""));
    }
}
