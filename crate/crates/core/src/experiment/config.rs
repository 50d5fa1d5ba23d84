//! Flat `key = value` configuration text.
//!
//! ```text
//! # comment
//! objective.kind = toy
//! beta0 = 0.5
//! runs = slow, fast
//! run.slow.beta0 = 0.23
//! ```
//!
//! Keys under `run.<label>.` override the base keys for that run only.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

pub(crate) fn config_error(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(&format!("line {}", n + 1), "expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(config_error(&format!("line {}", n + 1), format!("bad key `{key}`")));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(config_error(key, "given more than once"));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            entries: pairs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| config_error(key, format!("cannot parse `{v}`: {e}"))))
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        let item = item.trim();
                        item.parse::<T>()
                            .map_err(|e| config_error(key, format!("cannot parse `{item}`: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Base keys overlaid with `run.<label>.*`.
    pub fn for_run(&self, label: &str) -> Self {
        let prefix = format!("run.{label}.");
        let mut out: BTreeMap<String, String> = self
            .entries
            .iter()
            .filter(|(k, _)| !k.starts_with("run."))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (k, v) in &self.entries {
            if let Some(rest) = k.strip_prefix(&prefix) {
                out.insert(rest.to_string(), v.clone());
            }
        }
        Self { entries: out }
    }
}
