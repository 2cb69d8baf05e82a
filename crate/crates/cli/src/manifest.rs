use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything needed to rerun a command. `argv` is authoritative for replay;
/// the other fields are a readable summary of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub created_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: argv.to_vec(),
            inputs: Vec::new(),
            config: BTreeMap::new(),
            seed: None,
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Validation(format!("cannot encode manifest: {e}")))?;
        fs::write(path, text + "\n")
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: invalid manifest: {e}", path.display())))
    }

    /// Arguments for a rerun, optionally redirected to a new output path.
    pub fn replay_argv(&self, out: Option<&Path>) -> Vec<String> {
        let mut argv = self.argv.clone();
        if let Some(out) = out {
            let out = out.display().to_string();
            match argv.iter().position(|a| a == "--out") {
                Some(i) if i + 1 < argv.len() => argv[i + 1] = out,
                _ => {
                    if let Some(i) = argv.iter().position(|a| a.starts_with("--out=")) {
                        argv[i] = format!("--out={out}");
                    } else {
                        argv.push("--out".into());
                        argv.push(out);
                    }
                }
            }
        }
        argv
    }
}

/// `<out>.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
