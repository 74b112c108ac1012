//! Optional TOML defaults. Every key mirrors a flag, and a flag given on the
//! command line always wins.
//!
//! ```toml
//! [build]
//! mode = "directional"
//! tolerance = 30.0
//! block_size = 128
//! max_nodes = 20000
//!
//! [serve]
//! listen = "127.0.0.1:8080"
//! cors = true
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub build: BuildConfig,
    #[serde(default)]
    pub serve: ServeConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub mode: Option<String>,
    pub tolerance: Option<f64>,
    pub block_size: Option<usize>,
    pub max_nodes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeConfig {
    pub listen: Option<String>,
    pub cors: Option<bool>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}
