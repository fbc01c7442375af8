use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, Utc};
use serde::Serialize;
use serde_json::Value;
use tweetscope_core::CorpusCounts;

use crate::error::CliError;
use crate::layout;

/// Record of one stage run, written to `manifests/<stage>.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub stage: &'static str,
    pub version: &'static str,
    pub started_at: DateTime<Utc>,
    pub inputs: Vec<String>,
    pub lexicons: Vec<String>,
    pub config: BTreeMap<&'static str, Value>,
    pub counts: Option<CorpusCounts>,
    pub outputs: Vec<String>,
    pub durations_ms: BTreeMap<&'static str, u128>,
    #[serde(skip)]
    clock: Option<(&'static str, Instant)>,
}

impl RunManifest {
    pub fn start(stage: &'static str) -> Self {
        Self {
            stage,
            version: env!("CARGO_PKG_VERSION"),
            started_at: Utc::now(),
            inputs: Vec::new(),
            lexicons: Vec::new(),
            config: BTreeMap::new(),
            counts: None,
            outputs: Vec::new(),
            durations_ms: BTreeMap::new(),
            clock: None,
        }
    }

    /// Start timing `step`, closing the previous step.
    pub fn step(&mut self, step: &'static str) {
        self.finish_step();
        self.clock = Some((step, Instant::now()));
    }

    fn finish_step(&mut self) {
        if let Some((name, t)) = self.clock.take() {
            self.durations_ms.insert(name, t.elapsed().as_millis());
        }
    }

    pub fn input(&mut self, p: impl AsRef<Path>) {
        self.inputs.push(p.as_ref().display().to_string());
    }

    pub fn output(&mut self, p: impl AsRef<Path>) {
        self.outputs.push(p.as_ref().display().to_string());
    }

    pub fn set(&mut self, key: &'static str, v: impl Serialize) {
        self.config.insert(key, serde_json::to_value(v).expect("config values serialize"));
    }

    /// Write the manifest after checking every listed output exists.
    pub fn write(mut self, dir: &Path) -> Result<PathBuf, CliError> {
        self.finish_step();
        let started = self.started_at;
        self.durations_ms
            .insert("total", (Utc::now() - started).num_milliseconds().max(0) as u128);
        for out in &self.outputs {
            if !Path::new(out).exists() {
                return Err(CliError::Internal(format!("stage output {out} is missing")));
            }
        }
        let path = layout::manifest(dir, self.stage);
        layout::write_json(&path, &self)?;
        Ok(path)
    }
}
