use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::{io, CliError};

pub const TOOL: &str = "reltime";

/// What a run did: enough to repeat it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Configuration after defaults, config file and flags are merged.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub jobs: Option<usize>,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub started_unix: f64,
    pub wall_seconds: f64,
}

/// Collects manifest fields while a command runs.
pub(crate) struct Recorder {
    subcommand: &'static str,
    started: Instant,
    started_unix: f64,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    jobs: Option<usize>,
}

impl Recorder {
    pub fn new(subcommand: &'static str, jobs: Option<usize>) -> Self {
        let started_unix =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Recorder {
            subcommand,
            started: Instant::now(),
            started_unix,
            config: serde_json::Value::Null,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            jobs,
        }
    }

    pub fn config(&mut self, cfg: &impl Serialize) {
        self.config = serde_json::to_value(cfg).expect("configs serialize");
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_path_buf());
    }

    pub fn output(&mut self, p: &Path) {
        self.outputs.push(p.to_path_buf());
    }

    pub fn finish(self) -> RunManifest {
        RunManifest {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: self.subcommand.to_string(),
            config: self.config,
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            jobs: self.jobs,
            timings: Timings { started_unix: self.started_unix, wall_seconds: self.started.elapsed().as_secs_f64() },
        }
    }

    /// Writes the manifest to `explicit`, else next to the first output.
    /// Runs whose only output is stdout write none unless asked.
    pub fn write(self, explicit: Option<&Path>) -> Result<(), CliError> {
        let path = match (explicit, self.outputs.first()) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(out)) => crate::sibling(out, "manifest.json"),
            (None, None) => return Ok(()),
        };
        let m = self.finish();
        let text = serde_json::to_string_pretty(&m).expect("manifests serialize") + "\n";
        io::write(&path, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_goes_next_to_the_first_output() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("c.jsonl");
        let mut rec = Recorder::new("generate", Some(2));
        rec.config(&serde_json::json!({"docs": 3}));
        rec.seed = Some(9);
        rec.output(&out);
        rec.write(None).unwrap();
        let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.jsonl.manifest.json")).unwrap()).unwrap();
        assert_eq!((m.tool.as_str(), m.subcommand.as_str(), m.seed, m.jobs), (TOOL, "generate", Some(9), Some(2)));
        assert_eq!(m.outputs, vec![out]);
    }

    #[test]
    fn stdout_only_runs_write_no_manifest_unless_asked() {
        let dir = tempfile::tempdir().unwrap();
        Recorder::new("render", None).write(None).unwrap();
        let p = dir.path().join("m.json");
        Recorder::new("render", None).write(Some(&p)).unwrap();
        assert!(p.exists());
    }
}
