//! `key = value` run configuration files. Command-line flags win over keys.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("config line {}: expected `key = value`, got `{raw}`", i + 1);
            };
            let key = k.trim().replace('_', "-");
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                bail!("config line {}: duplicate key `{key}`", i + 1);
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("in config {}", p.display()))
            }
            None => Ok(Self::default()),
        }
    }

    /// The flag value if given, else the config key, else `None`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| anyhow::anyhow!("invalid value `{v}` for `{key}` in config file")),
            None => Ok(None),
        }
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Keys that no command option consumed.
    pub fn unknown_keys(&self, known: &[&str]) -> Vec<String> {
        self.values
            .keys()
            .filter(|k| !known.contains(&k.as_str()))
            .cloned()
            .collect()
    }
}

/// Comma-separated list of values.
pub fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| anyhow::anyhow!("invalid {what} `{s}`")))
        .collect()
}
