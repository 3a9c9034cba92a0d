//! Run manifests: the provenance record written alongside every batch of
//! outputs.
//!
//! A manifest is written in `running` status before the experiment
//! executes and finalized (status, wall-clock end, per-output checksums)
//! afterwards, so an interrupted run is distinguishable from a complete
//! one. The manifest itself carries the wall-clock timestamps; the
//! checksummed outputs never do, which is what makes reruns of an
//! identical configuration byte-identical.

use std::collections::BTreeMap;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Version stamp of the output formats (bumped when any emitted schema
/// or the floating-point evaluation order changes).
pub const ARTIFACT_VERSION: &str = "1";

/// Schema tag of the manifest document itself.
pub const MANIFEST_SCHEMA: &str = "snls.run-manifest.v1";

/// Name of the manifest file inside a run directory.
pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance record of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub artifact_version: String,
    /// Experiment kind that produced the outputs.
    pub kind: String,
    /// Master seed of the run.
    pub seed: u64,
    /// SHA-256 of the canonical TOML form of the configuration (output
    /// location stripped).
    pub config_sha256: String,
    /// `running` until the run finishes, then `complete`.
    pub status: String,
    pub started_utc: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_utc: Option<String>,
    /// File name to SHA-256 of every output in the run directory
    /// (excluding the manifest itself).
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    /// Fresh manifest in `running` status with no outputs yet.
    pub fn started(kind: &str, seed: u64, config_sha256: String) -> Self {
        RunManifest {
            schema: MANIFEST_SCHEMA.to_string(),
            artifact_version: ARTIFACT_VERSION.to_string(),
            kind: kind.to_string(),
            seed,
            config_sha256,
            status: "running".to_string(),
            started_utc: now_utc(),
            finished_utc: None,
            outputs: BTreeMap::new(),
        }
    }

    /// Marks the run complete and records the output checksums.
    pub fn finalize(&mut self, outputs: BTreeMap<String, String>) {
        self.status = "complete".to_string();
        self.finished_utc = Some(now_utc());
        self.outputs = outputs;
    }

    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("manifest serialization cannot fail");
        text.push('\n');
        text
    }
}

/// Millisecond-resolution UTC timestamp.
fn now_utc() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Lowercase hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_matches_known_vector() {
        // SHA-256 of the empty string and of "abc" are standard test
        // vectors.
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lifecycle_round_trips() {
        let mut m = RunManifest::started("simulate", 9, "deadbeef".into());
        assert_eq!(m.status, "running");
        assert!(m.finished_utc.is_none());
        let mut outputs = BTreeMap::new();
        outputs.insert("ledger.csv".to_string(), sha256_hex(b"x"));
        m.finalize(outputs);
        assert_eq!(m.status, "complete");
        assert!(m.finished_utc.is_some());
        let back: RunManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
