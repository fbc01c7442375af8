//! Server configuration: a `key = value` file plus `TWEETSCOPE_*` overrides.

use std::net::{IpAddr, Ipv4Addr};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

pub const ENV_PREFIX: &str = "TWEETSCOPE_";

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{var}: {message}")]
    Env { var: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub bind: IpAddr,
    pub port: u16,
    pub data_dir: PathBuf,
    /// Allowed CORS origin; `*` allows any.
    pub cors_origin: Option<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            data_dir: PathBuf::from("."),
            cors_origin: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    bind: Option<IpAddr>,
    port: Option<u16>,
    data_dir: Option<PathBuf>,
    cors_origin: Option<String>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ServerConfig {
    /// Parse a config file body over the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let file: FileConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
            message: e.message().to_string(),
        })?;
        let d = Self::default();
        Ok(Self {
            bind: file.bind.unwrap_or(d.bind),
            port: file.port.unwrap_or(d.port),
            data_dir: file.data_dir.unwrap_or(d.data_dir),
            cors_origin: file.cors_origin.filter(|s| !s.is_empty()),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Apply `TWEETSCOPE_BIND`, `_PORT`, `_DATA_DIR` and `_CORS_ORIGIN`.
    /// Other variables are ignored.
    pub fn with_env<I, K, V>(mut self, vars: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            let (k, v) = (k.as_ref(), v.as_ref());
            let Some(key) = k.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let bad = |message: String| ConfigError::Env {
                var: k.to_string(),
                message,
            };
            match key {
                "BIND" => self.bind = v.parse().map_err(|e| bad(format!("{e}")))?,
                "PORT" => self.port = v.parse().map_err(|e| bad(format!("{e}")))?,
                "DATA_DIR" => self.data_dir = PathBuf::from(v),
                "CORS_ORIGIN" => self.cors_origin = Some(v.to_string()).filter(|s| !s.is_empty()),
                _ => {}
            }
        }
        Ok(self)
    }

    pub fn with_process_env(self) -> Result<Self, ConfigError> {
        self.with_env(std::env::vars())
    }
}
