use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Settings;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a simulation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub policy: String,
    /// Every configuration key with its effective value.
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

impl RunManifest {
    pub fn new(settings: &Settings, policy: &str) -> Result<Self> {
        let mut config = settings.materialized().clone();
        config.insert("policy".into(), policy.into());
        let inputs = match settings.input_path() {
            Some(path) => vec![InputDigest {
                path: path.display().to_string(),
                sha256: file_digest(&path)?,
            }],
            None => Vec::new(),
        };
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config["seed"].parse().context("seed")?,
            policy: policy.into(),
            config,
            inputs,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    /// Settings recorded in the manifest, after checking that its inputs
    /// are unchanged.
    pub fn settings(&self) -> Result<Settings> {
        for input in &self.inputs {
            let now = file_digest(Path::new(&input.path))?;
            if now != input.sha256 {
                bail!(
                    "input {} changed since the manifest was written",
                    input.path
                );
            }
        }
        let mut config = self.config.clone();
        config.insert("seed".into(), self.seed.to_string());
        Settings::from_map(&config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn roundtrip_settings() {
        let mut s = Settings::default();
        s.set("seed", "99").unwrap();
        let m = RunManifest::new(&s, "qed").unwrap();
        assert_eq!(m.seed, 99);
        let back = m.settings().unwrap();
        assert_eq!(back.get("policy"), "qed");
        assert_eq!(back.get("seed"), "99");
    }
}
