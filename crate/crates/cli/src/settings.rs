//! Option resolution: command-line flag, then config file, then default.

use std::path::Path;
use std::str::FromStr;

use vcot_core::io::Config;
use vcot_core::{Error, Result};

/// Keys a config file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "policy", "lambda", "eps", "w-gt", "delta-s", "delta-r", "eps-r", "eps-p", "h-max", "e-max", "beta", "gamma",
    "epochs", "lr", "batch-size", "hidden", "mode", "alpha", "seed",
];

#[derive(Default)]
pub struct Settings {
    config: Option<Config>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let config = Config::load(path)?;
        if let Some(k) = config.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(Error::validation(format!("{}: unknown key {k:?}", path.display())));
        }
        Ok(Settings { config: Some(config) })
    }

    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match &self.config {
            Some(c) => Ok(c.get(key)?.unwrap_or(default)),
            None => Ok(default),
        }
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match &self.config {
            Some(c) => c.get(key),
            None => Ok(None),
        }
    }
}
