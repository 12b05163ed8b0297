//! Staged output: files are written into a hidden temporary directory next
//! to their destination and renamed into place only once the whole command
//! has succeeded.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Provenance record written last by every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    /// SHA-256 of the canonical JSON of the effective configuration.
    pub config_hash: String,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub version: String,
}

pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("configuration serialises");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("value serialises");
    out.push(b'\n');
    out
}

#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    staging: tempfile::TempDir,
    files: Vec<String>,
    manifest_name: String,
    started: Instant,
}

impl OutputSet {
    /// Outputs go into directory `dir`, created if needed.
    pub fn in_dir(dir: &Path) -> Result<Self> {
        Self::create(dir, MANIFEST_NAME.to_string())
    }

    /// A single output file at `path`; the manifest becomes
    /// `<path>.manifest.json`.
    pub fn for_file(path: &Path) -> Result<(Self, String)> {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::Usage(format!("`{}` is not a file path", path.display())))?
            .to_string();
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let set = Self::create(&dir, format!("{name}.manifest.json"))?;
        Ok((set, name))
    }

    fn create(dir: &Path, manifest_name: String) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let staging = tempfile::Builder::new()
            .prefix(".papsmix-staging-")
            .tempdir_in(dir)
            .map_err(|e| Error::io(dir, e))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            staging,
            files: Vec::new(),
            manifest_name,
            started: Instant::now(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.staging.path().join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&self.dir.join(name), e))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_msc(&mut self, name: &str, cube: &papsmix_core::SpectralCube) -> Result<()> {
        let (data, sidecar) = crate::cube_io::encode_msc(cube);
        self.write(name, &data)?;
        self.write(&format!("{name}.json"), &sidecar)
    }

    pub fn path_of(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Moves every staged file into place, then writes the manifest.
    pub fn commit(self, command: &str, inputs: &[&Path], config_hash: String) -> Result<Vec<PathBuf>> {
        let mut placed = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let dest = self.dir.join(name);
            std::fs::rename(self.staging.path().join(name), &dest).map_err(|e| Error::io(&dest, e))?;
            placed.push(dest);
        }
        let manifest = RunManifest {
            command: command.to_string(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            config_hash,
            outputs: placed.iter().map(|p| p.display().to_string()).collect(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let staged = self.staging.path().join(&self.manifest_name);
        let dest = self.dir.join(&self.manifest_name);
        std::fs::write(&staged, to_json(&manifest)).map_err(|e| Error::io(&dest, e))?;
        std::fs::rename(&staged, &dest).map_err(|e| Error::io(&dest, e))?;
        Ok(placed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn listing(dir: &Path) -> Vec<String> {
        let mut names: Vec<String> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        names
    }

    #[test]
    fn nothing_lands_without_commit() {
        let root = tempfile::tempdir().unwrap();
        let out = root.path().join("run");
        {
            let mut set = OutputSet::in_dir(&out).unwrap();
            set.write("a.csv", b"x").unwrap();
        }
        assert!(listing(&out).is_empty());
    }

    #[test]
    fn commit_places_files_and_manifest() {
        let root = tempfile::tempdir().unwrap();
        let (mut set, name) = OutputSet::for_file(&root.path().join("m.csv")).unwrap();
        set.write(&name, b"x").unwrap();
        set.commit("estimate-matrix", &[], config_hash(&1)).unwrap();
        assert_eq!(listing(root.path()), vec!["m.csv", "m.csv.manifest.json"]);
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(root.path().join("m.csv.manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["command"], "estimate-matrix");
        assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    }
}
