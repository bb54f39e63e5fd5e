//! Run manifests: enough resolved configuration and checksums to reproduce
//! an output directory byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// FNV-1a 64-bit checksum, hex encoded. Stable, dependency-free, and good
/// enough to detect any accidental divergence between runs.
pub fn fnv64_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// The subcommand that produced the outputs.
    pub command: String,
    /// Fully resolved configuration (after defaults and environment).
    pub config: serde_json::Value,
    /// Checksum of the model the run used, when there was one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_hash: Option<String>,
    /// Checksums of every file the run wrote, keyed by file name.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            model_hash: None,
            outputs: BTreeMap::new(),
        }
    }

    pub fn set_model_bytes(&mut self, bytes: &[u8]) {
        self.model_hash = Some(format!("fnv64:{}", fnv64_hex(bytes)));
    }

    pub fn record_output(&mut self, name: &str, bytes: &[u8]) {
        self.outputs
            .insert(name.to_string(), format!("fnv64:{}", fnv64_hex(bytes)));
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join("manifest.json"), text)
    }
}
