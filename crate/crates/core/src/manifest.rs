//! Run manifests: a flat `key=value` record written next to each artifact.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config: Vec<(String, String)>,
    /// Input path and its SHA-256.
    pub inputs: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time: Duration,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            ..Default::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn add_input(&mut self, path: impl AsRef<Path>) -> Result<&mut Self> {
        let path = path.as_ref();
        let digest = sha256_file(path)?;
        self.inputs.push((path.display().to_string(), digest));
        Ok(self)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command={}", self.command);
        let _ = writeln!(out, "tool_version={}", self.tool_version);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed={seed}");
        }
        for (key, value) in &self.config {
            let _ = writeln!(out, "config.{key}={value}");
        }
        for (path, digest) in &self.inputs {
            let _ = writeln!(out, "input.sha256.{path}={digest}");
        }
        let _ = writeln!(out, "wall_time_secs={:.3}", self.wall_time.as_secs_f64());
        out
    }

    /// The manifest path for an artifact: `<artifact>.manifest`.
    pub fn path_for(artifact: impl AsRef<Path>) -> PathBuf {
        let mut name = artifact.as_ref().as_os_str().to_owned();
        name.push(".manifest");
        PathBuf::from(name)
    }

    pub fn write_for(&self, artifact: impl AsRef<Path>) -> Result<PathBuf> {
        let path = Self::path_for(artifact);
        fs::write(&path, self.render()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher
        .finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_flat_key_values() {
        let mut m = RunManifest::new("train");
        m.seed = Some(7);
        m.set("dim", 50);
        m.wall_time = Duration::from_millis(1500);
        let text = m.render();
        assert!(text.starts_with("command=train\n"));
        assert!(text.contains("seed=7\n"));
        assert!(text.contains("config.dim=50\n"));
        assert!(text.ends_with("wall_time_secs=1.500\n"));
        assert!(text.lines().all(|l| l.contains('=')));
    }

    #[test]
    fn digests_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(RunManifest::path_for("out/emb.txt"), PathBuf::from("out/emb.txt.manifest"));
    }
}
