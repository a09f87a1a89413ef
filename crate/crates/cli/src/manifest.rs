use std::fs;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::CliError;

/// Everything needed to repeat a run. Wall-clock data lives in a separate
/// `timing.json` so that the manifest itself is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Config,
    /// Output files, relative to the command directory.
    pub outputs: Vec<String>,
    pub timing_file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_seconds: u64,
    pub elapsed_seconds: f64,
    pub threads: usize,
}

/// Collects the files a command writes under its directory.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    started: Instant,
    started_unix: u64,
}

impl Outputs {
    pub fn create(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Outputs { dir, files: Vec::new(), started: Instant::now(), started_unix })
    }

    pub fn path(&mut self, name: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name)?;
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serialisable output");
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.bytes(name, text.as_bytes())
    }

    pub fn finish(mut self, command: &str, config: &Config) -> Result<Vec<String>, CliError> {
        let mut outputs = self.files.clone();
        outputs.push("manifest.json".into());
        let manifest = RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            outputs: outputs.clone(),
            timing_file: "timing.json".into(),
        };
        self.json("manifest.json", &manifest)?;
        let timing = Timing {
            started_unix_seconds: self.started_unix,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
        };
        let mut text = serde_json::to_string_pretty(&timing).expect("serialisable timing");
        text.push('\n');
        let path = self.dir.join("timing.json");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(outputs)
    }
}
