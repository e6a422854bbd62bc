//! `key = value` configuration files with `#` comments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    origin: PathBuf,
    values: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: &str| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                msg: msg.to_string(),
            };
            let (k, v) = line.split_once('=').ok_or_else(|| parse_err("expected key = value"))?;
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(parse_err("empty key"));
            }
            if values.insert(key, (i + 1, v.trim().to_string())).is_some() {
                return Err(parse_err("duplicate key"));
            }
        }
        Ok(Config {
            origin: origin.to_path_buf(),
            values,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&super::read_text(path)?, path)
    }

    /// Typed lookup; keys match with `-` and `_` treated alike.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some((line, raw)) = self.values.get(&key.replace('_', "-")) else {
            return Ok(None);
        };
        raw.parse().map(Some).map_err(|_| Error::Parse {
            path: self.origin.clone(),
            line: *line,
            msg: format!("cannot parse {key} = {raw:?}"),
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}
