//! Flat dotted-key experiment configs: one `key = value` per line, `#`
//! comments, whitespace-insensitive. Unknown keys are rejected up front so
//! typos fail loudly.

use std::collections::BTreeMap;
use std::path::Path;

use crate::RunError;

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(RunError::Config(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(RunError::Config(format!("line {}: empty key or value", lineno + 1)));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(RunError::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, RunError> {
        self.get(key).ok_or_else(|| RunError::Config(format!("missing key `{key}`")))
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, RunError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| RunError::Config(format!("key `{key}`: `{v}` is not a number"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, RunError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, RunError> {
        self.f64_opt(key)?.ok_or_else(|| RunError::Config(format!("missing key `{key}`")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, RunError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| RunError::Config(format!("key `{key}`: `{v}` is not an integer"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, RunError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| RunError::Config(format!("key `{key}`: `{v}` is not an integer"))),
        }
    }

    /// Comma-separated list of numbers.
    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, RunError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        RunError::Config(format!("key `{key}`: `{s}` is not a number"))
                    })
                })
                .collect(),
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, RunError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse::<usize>().map_err(|_| {
                        RunError::Config(format!("key `{key}`: `{s}` is not an integer"))
                    })
                })
                .collect(),
        }
    }

    /// `auto` (or absence) maps to None.
    pub fn auto_f64(&self, key: &str) -> Result<Option<f64>, RunError> {
        match self.get(key) {
            None => Ok(None),
            Some("auto") => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| RunError::Config(format!("key `{key}`: `{v}` is not a number"))),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }
}
