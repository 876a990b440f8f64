use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use rfbroker_core::DEFAULT_WEIGHT_TOLERANCE;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn default_listen() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn default_tolerance() -> f64 {
    DEFAULT_WEIGHT_TOLERANCE
}

fn default_log_level() -> String {
    "info".into()
}

/// Service configuration, read from TOML.
///
/// ```toml
/// listen = "127.0.0.1:8080"
/// data_dir = "/var/lib/rfbroker"
/// user_token = "..."
/// monitor_token = "..."
/// weight_tolerance = 1e-9
/// log_level = "info"
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrokerConfig {
    #[serde(default = "default_listen")]
    pub listen: SocketAddr,
    /// Holds catalog snapshots, selection records and the violation journal.
    pub data_dir: PathBuf,
    pub user_token: String,
    /// Scope allowed to register monitors.
    pub monitor_token: String,
    #[serde(default = "default_tolerance")]
    pub weight_tolerance: f64,
    #[serde(default = "default_log_level")]
    pub log_level: String,
}

impl BrokerConfig {
    pub fn new(data_dir: impl Into<PathBuf>, user_token: &str, monitor_token: &str) -> Self {
        Self {
            listen: default_listen(),
            data_dir: data_dir.into(),
            user_token: user_token.into(),
            monitor_token: monitor_token.into(),
            weight_tolerance: default_tolerance(),
            log_level: default_log_level(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let config: Self = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.weight_tolerance.is_finite() && self.weight_tolerance > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "weight_tolerance must be a positive number, got {}",
                self.weight_tolerance
            )));
        }
        if self.user_token.is_empty() || self.monitor_token.is_empty() {
            return Err(ConfigError::Invalid(
                "user_token and monitor_token must be non-empty".into(),
            ));
        }
        if self.data_dir.as_os_str().is_empty() {
            return Err(ConfigError::Invalid("data_dir must be set".into()));
        }
        Ok(())
    }
}
