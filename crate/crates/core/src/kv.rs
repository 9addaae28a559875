//! Flat `key = value` text, used by dataset sidecars and experiment configs.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are trimmed and
//! must be unique.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KvError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
}

/// Parsed entries in file order, with their 1-based line numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: Vec<(String, String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or(KvError::Malformed { line })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(KvError::Malformed { line });
            }
            if entries.iter().any(|(k, _, _)| k == key) {
                return Err(KvError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            entries.push((key.to_string(), value.trim().to_string(), line));
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, _, l)| *l)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _, _)| k.as_str())
    }
}
