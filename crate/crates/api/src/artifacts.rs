//! The analysis artifacts a server instance exposes.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;
use tweetscope_core::aggregate::{load_snapshot, AggregateError, AggregateSnapshot, SnapshotMeta};
use tweetscope_core::controversy::ControversyExport;
use tweetscope_core::topics::TopicsExport;

pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const TOPICS_FILE: &str = "topics.json";
pub const CONTROVERSY_FILE: &str = "controversy.json";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Snapshot { path: String, source: AggregateError },
    #[error("{path}: {message}")]
    Artifact { path: String, message: String },
}

/// Everything loaded from one data directory. The snapshot is required;
/// topics and controversy results are optional.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub snapshot: AggregateSnapshot,
    pub topics: Option<TopicsExport>,
    pub controversy: Option<ControversyExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    #[serde(flatten)]
    pub snapshot: SnapshotMeta,
    pub topic_weeks: Vec<String>,
    pub controversy_terms: Vec<String>,
}

fn load_optional<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>, LoadError> {
    let err = |message: String| LoadError::Artifact {
        path: path.display().to_string(),
        message,
    };
    match fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map(Some).map_err(|e| err(e.to_string())),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(err(e.to_string())),
    }
}

impl Artifacts {
    pub fn load(dir: &Path) -> Result<Self, LoadError> {
        let path = dir.join(SNAPSHOT_FILE);
        let snapshot = load_snapshot(&path).map_err(|source| LoadError::Snapshot {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self {
            snapshot,
            topics: load_optional(&dir.join(TOPICS_FILE))?,
            controversy: load_optional(&dir.join(CONTROVERSY_FILE))?,
        })
    }

    pub fn meta(&self) -> Meta {
        Meta {
            snapshot: self.snapshot.meta(),
            topic_weeks: self
                .topics
                .iter()
                .flat_map(|t| t.weeks.keys().map(ToString::to_string))
                .collect(),
            controversy_terms: self
                .controversy
                .iter()
                .flat_map(|c| c.terms.iter().map(|t| t.term.clone()))
                .collect(),
        }
    }
}
