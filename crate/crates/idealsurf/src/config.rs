//! Plain-text `key = value` configuration with `[section]` headers.
//!
//! Keys inside a section are namespaced as `section.key`. Values are kept as
//! strings; typed accessors parse on demand. Later assignments override
//! earlier ones, and command-line flags override file values at the call
//! site.

use std::collections::BTreeMap;

use crate::{Error, Result};

/// Parsed configuration, ordered by key for deterministic iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

/// Parse the configuration text. Blank lines and `#`/`;` comments are
/// ignored; inline comments are not supported (a `#` in a value is literal).
pub fn parse_config(text: &str) -> Result<Config> {
    let mut entries = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(Error::Config(format!(
                    "line {}: unterminated section header",
                    lineno + 1
                )));
            };
            let name = name.trim();
            if name.is_empty() || !name.chars().all(valid_key_char) {
                return Err(Error::Config(format!(
                    "line {}: invalid section name {name:?}",
                    lineno + 1
                )));
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim();
        if key.is_empty() || !key.chars().all(valid_key_char) {
            return Err(Error::Config(format!(
                "line {}: invalid key {key:?}",
                lineno + 1
            )));
        }
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        entries.insert(full, value.trim().to_string());
    }
    Ok(Config { entries })
}

fn valid_key_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.'
}

impl Config {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parse a float; `inf` is accepted (the `ρ → ∞` sentinel).
    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("{key}: not a number: {v:?}")))
            })
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::Config(format!("{key}: not an integer: {v:?}")))
            })
            .transpose()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
