//! Artifact writing: atomic CSV output plus a metadata sidecar carrying
//! the config echo, config hash, seed, versions, and wall time.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// Hex SHA-256 of the raw config text.
pub fn config_sha256(raw: &str) -> String {
    let digest = Sha256::digest(raw.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write `content` to `path` atomically: a temporary file in the same
/// directory is renamed into place, so a failed run leaves no partial
/// artifact at the target path.
pub fn atomic_write(path: &Path, content: &str) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "artifact".into()),
        std::process::id()
    ));
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool_version: &'a str,
    master_seed: u64,
    config_sha256: &'a str,
    wall_time_seconds: f64,
    csv_files: Vec<String>,
    config: &'a ExperimentConfig,
}

/// One experiment's artifacts: named CSVs plus the `.meta.toml` sidecar.
pub struct ArtifactSet<'a> {
    pub out_dir: PathBuf,
    pub stem: &'a str,
    pub config: &'a ExperimentConfig,
    pub raw_config: &'a str,
    pub wall_time_seconds: f64,
}

impl ArtifactSet<'_> {
    /// `csvs` maps a suffix (empty for the main file) to CSV content.
    /// Returns the paths written.
    pub fn write(&self, csvs: &[(&str, &str)]) -> io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        let mut names = Vec::new();
        for (suffix, content) in csvs {
            let name = if suffix.is_empty() {
                format!("{}.csv", self.stem)
            } else {
                format!("{}.{}.csv", self.stem, suffix)
            };
            let path = self.out_dir.join(&name);
            atomic_write(&path, content)?;
            names.push(name);
            written.push(path);
        }
        let sha = config_sha256(self.raw_config);
        let meta = Metadata {
            tool_version: env!("CARGO_PKG_VERSION"),
            master_seed: self.config.master_seed,
            config_sha256: &sha,
            wall_time_seconds: self.wall_time_seconds,
            csv_files: names,
            config: self.config,
        };
        let meta_text = toml::to_string(&meta).expect("metadata serializes");
        let meta_path = self.out_dir.join(format!("{}.meta.toml", self.stem));
        atomic_write(&meta_path, &meta_text)?;
        written.push(meta_path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_is_stable_hex() {
        let h = config_sha256("kind = \"sweep\"");
        assert_eq!(h.len(), 64);
        assert_eq!(h, config_sha256("kind = \"sweep\""));
        assert_ne!(h, config_sha256("kind = \"bounds\""));
    }
}
