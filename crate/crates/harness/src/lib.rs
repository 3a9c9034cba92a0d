//! Batch-experiment harness for the quintic stochastic NLS laboratory.
//!
//! The harness turns one strict TOML configuration plus one master seed
//! into a self-describing run directory: the resolved configuration, the
//! experiment outputs (CSV ledgers, JSON-Lines reports, JSON window
//! plans), and a manifest with per-output SHA-256 checksums. Runs are
//! atomic — a directory either appears complete or not at all — and
//! byte-reproducible: the same configuration and seed produce the same
//! output bytes regardless of thread count or machine.

pub mod config;
pub mod manifest;
pub mod run;

pub use config::{parse_config, validate, ExperimentConfig, ExperimentKind};
pub use manifest::{sha256_hex, RunManifest, ARTIFACT_VERSION, MANIFEST_FILE};
pub use run::{run, HarnessError};
