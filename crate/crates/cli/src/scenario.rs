//! Line-oriented `key = value` scenario files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Params {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Schema {
                    key: line.to_string(),
                    reason: format!("line {} is not of the form key = value", number + 1),
                });
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CliError::Schema { key, reason: format!("empty key on line {}", number + 1) });
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Schema { key, reason: "given more than once".into() });
            }
        }
        Ok(Params { values, used: BTreeSet::new() })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::FileNotFound(path.display().to_string()),
            _ => CliError::Io(format!("{}: {e}", path.display())),
        })?;
        Self::parse(&text)
    }

    /// Replaces (or inserts) a value, as done for `--seed`.
    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.values.get(key).cloned()
    }

    pub fn required<T: FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        let raw = self.take(key).ok_or_else(|| CliError::Schema { key: key.into(), reason: "missing".into() })?;
        parse_value(key, &raw)
    }

    pub fn optional<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        match self.take(key) {
            Some(raw) => parse_value(key, &raw),
            None => Ok(default),
        }
    }

    pub fn optional_opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        self.take(key).map(|raw| parse_value(key, &raw)).transpose()
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&mut self, key: &str) -> Result<Vec<T>, CliError> {
        let raw = self.take(key).ok_or_else(|| CliError::Schema { key: key.into(), reason: "missing".into() })?;
        split_list(key, &raw)
    }

    pub fn optional_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.take(key).map(|raw| split_list(key, &raw)).transpose()
    }

    /// One of `choices`, defaulting to the first.
    pub fn choice(&mut self, key: &str, choices: &[&'static str]) -> Result<&'static str, CliError> {
        let raw = self.optional(key, choices[0].to_string())?;
        choices.iter().copied().find(|c| *c == raw).ok_or_else(|| CliError::Schema {
            key: key.into(),
            reason: format!("'{raw}' is not one of {}", choices.join(", ")),
        })
    }

    /// Rejects keys that no reader asked for.
    pub fn finish(self) -> Result<(), CliError> {
        match self.values.keys().find(|k| !self.used.contains(*k)) {
            Some(key) => Err(CliError::Schema { key: key.clone(), reason: "unknown key".into() }),
            None => Ok(()),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse().map_err(|_| CliError::Schema { key: key.into(), reason: format!("cannot parse '{raw}'") })
}

fn split_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>, CliError> {
    raw.split(',').map(|item| parse_value(key, item.trim())).collect()
}
