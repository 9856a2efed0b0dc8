use std::path::PathBuf;

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

/// Records how an output was produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub threads: usize,
    pub started: String,
    pub finished: Option<String>,
    pub outputs: Vec<PathBuf>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(subcommand: &str, parameters: Value, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.into(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            threads: rayon::current_num_threads(),
            started: now(),
            finished: None,
            outputs: Vec::new(),
        }
    }

    pub fn output(&mut self, path: Option<&std::path::Path>) {
        if let Some(p) = path {
            self.outputs.push(p.to_path_buf());
        }
    }

    pub fn finish(&mut self) {
        self.finished = Some(now());
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}
