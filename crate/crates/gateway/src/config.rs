//! Server settings: defaults, then a TOML file, then `DCM_BIND` and
//! `DCM_DATA_DIR`, then command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{GatewayError, Result};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_DATA_DIR: &str = "sessions";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub bind: String,
    pub data_dir: PathBuf,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: DEFAULT_BIND.into(),
            data_dir: DEFAULT_DATA_DIR.into(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    bind: Option<String>,
    data_dir: Option<PathBuf>,
}

impl ServerConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: FileConfig = toml::from_str(text).map_err(|e| GatewayError::Usage(format!("config: {e}")))?;
        let mut cfg = ServerConfig::default();
        if let Some(b) = file.bind {
            cfg.bind = b;
        }
        if let Some(d) = file.data_dir {
            cfg.data_dir = d;
        }
        Ok(cfg)
    }

    /// Layers the optional file, the environment and explicit overrides.
    pub fn resolve(
        file: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
        bind: Option<String>,
        data_dir: Option<PathBuf>,
    ) -> Result<Self> {
        let mut cfg = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| GatewayError::File {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                ServerConfig::from_toml(&text)?
            }
            None => ServerConfig::default(),
        };
        if let Some(b) = env("DCM_BIND") {
            cfg.bind = b;
        }
        if let Some(d) = env("DCM_DATA_DIR") {
            cfg.data_dir = d.into();
        }
        if let Some(b) = bind {
            cfg.bind = b;
        }
        if let Some(d) = data_dir {
            cfg.data_dir = d;
        }
        Ok(cfg)
    }
}
