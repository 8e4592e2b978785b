use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::CliError;

pub const SCHEMA: &str = "v1";

/// Provenance record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    /// Hex SHA-256 of each input file, in argument order.
    pub input_hash: Vec<InputHash>,
    pub outputs: Vec<String>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

pub fn hash_file(path: &Path) -> Result<InputHash, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(InputHash { path: path.display().to_string(), sha256 })
}

/// Collects outputs as they are written and emits `manifest.json` at the end.
pub struct Recorder {
    out: PathBuf,
    started: Instant,
    outputs: Vec<String>,
}

impl Recorder {
    pub fn new(out: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        Ok(Self { out: out.to_path_buf(), started: Instant::now(), outputs: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<V: Serialize + ?Sized>(&mut self, name: &str, value: &V) -> Result<(), CliError> {
        let mut text = signed_spectra::report::to_json_string(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn finish(
        self,
        command: &str,
        parameters: &impl Serialize,
        seed: Option<u64>,
        inputs: &[&Path],
    ) -> Result<(), CliError> {
        let input_hash = inputs.iter().map(|p| hash_file(p)).collect::<Result<Vec<_>, _>>()?;
        let manifest = RunManifest {
            schema: SCHEMA,
            command: command.to_string(),
            parameters: serde_json::to_value(parameters)?,
            seed,
            input_hash,
            outputs: self.outputs.clone(),
            wall_time_secs: self.started.elapsed().as_secs_f64(),
        };
        let path = self.path("manifest.json");
        let mut text = signed_spectra::report::to_json_string(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}
