//! Fixed file names inside a data directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub use tweetscope_api::{CONTROVERSY_FILE, SNAPSHOT_FILE, TOPICS_FILE};

pub const CORPUS_DIR: &str = "corpus";
pub const STATS_FILE: &str = "stats.json";
pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const MANIFEST_DIR: &str = "manifests";

pub fn corpus_dir(dir: &Path) -> PathBuf {
    dir.join(CORPUS_DIR)
}

pub fn manifest(dir: &Path, stage: &str) -> PathBuf {
    dir.join(MANIFEST_DIR).join(format!("{stage}.json"))
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::write(path, e))
}

/// Pretty JSON with a trailing newline, written via a temp file and rename.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| CliError::write(path, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::write(path, e))
}
