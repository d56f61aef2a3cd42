//! `manifest.json`: what a run directory holds and how the run went.

use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SeedEntry {
    pub seed: u64,
    pub master_seed: u64,
    pub dir: String,
    pub status: String,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub kind: String,
    /// Normalized config text, defaults included.
    pub config: String,
    pub started_at: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<String>,
    /// running | complete | partial | failed
    pub status: String,
    pub seeds: Vec<SeedEntry>,
    pub aggregates: Vec<String>,
}

pub fn version() -> &'static str {
    env!("AGGAN_VERSION")
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

impl RunManifest {
    pub fn save(&self, dir: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_atomic(&dir.join("manifest.json"), text.as_bytes())
    }
}
