//! Run manifest written next to every CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub library_version: String,
    pub command: String,
    pub seed: u64,
    /// Git-style object hash of the input bytes.
    pub input_hash: String,
    pub configs: Vec<Value>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, input: &[u8], configs: Vec<Value>, outputs: Vec<String>) -> Self {
        Self {
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            input_hash: git_blob_hash(input),
            configs,
            outputs,
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")
    }
}

/// SHA-256 over `blob <len>\0<bytes>`, as in a SHA-256 git object store.
pub fn git_blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
