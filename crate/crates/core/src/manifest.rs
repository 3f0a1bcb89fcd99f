//! Run manifests: everything needed to reproduce a command's artifacts.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub params: Value,
    pub tolerances: Value,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub artifacts: Vec<String>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, params: Value) -> Self {
        RunManifest {
            schema_version: crate::SCHEMA_VERSION,
            command: command.to_string(),
            params,
            tolerances: Value::Null,
            n: None,
            seed: None,
            artifacts: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn with_tolerances(mut self, tol: Value) -> Self {
        self.tolerances = tol;
        self
    }

    pub fn with_order(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// Output of one command: a JSON document plus named file artifacts.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub json: Value,
    pub artifacts: Vec<(String, Vec<u8>)>,
    /// Text replacing the JSON on standard output (TAP reports).
    pub text: Option<String>,
    pub exit_code: i32,
}

impl RunOutput {
    pub fn new(manifest: RunManifest, json: Value) -> Self {
        RunOutput { manifest, json, artifacts: Vec::new(), text: None, exit_code: 0 }
    }

    pub fn artifact(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.artifacts.push((name.to_string(), bytes));
        self
    }

    /// Writes `result.json`, the artifacts and the manifest into `dir`.
    ///
    /// Every JSON document written references the manifest by file name.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut manifest = self.manifest.clone();
        manifest.artifacts = std::iter::once("result.json".to_string())
            .chain(self.artifacts.iter().map(|(n, _)| n.clone()))
            .collect();
        let mut json = self.json.clone();
        if let Value::Object(map) = &mut json {
            map.insert("manifest".into(), Value::String(MANIFEST_FILE.into()));
        }
        fs::write(dir.join("result.json"), to_pretty(&json)?)?;
        for (name, bytes) in &self.artifacts {
            fs::write(dir.join(name), bytes)?;
        }
        fs::write(dir.join(MANIFEST_FILE), to_pretty(&serde_json::to_value(&manifest)?)?)?;
        Ok(())
    }
}

pub fn to_pretty(v: &Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}
