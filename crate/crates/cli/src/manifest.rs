use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Convergence flag of one estimate in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateFlag {
    pub name: String,
    pub converged: bool,
}

/// Per-run provenance. The only place timestamps live, so reports stay
/// byte-identical across re-runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub artifact_version: String,
    pub config_schema_version: u32,
    pub scenario: String,
    pub outputs: Vec<String>,
    pub estimates: Vec<EstimateFlag>,
    pub exit_code: i32,
    pub wall_clock_seconds: f64,
    pub finished_unix_seconds: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
