//! Flat `key = value` text files with `#` comments, used for radar
//! configurations and scene descriptions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parsed key/value document that remembers the source line of every key.
#[derive(Debug, Clone, Default)]
pub struct KvDoc {
    origin: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KvDoc {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line,
                reason: format!("expected key=value, found '{content}'"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line,
                    reason: "empty key".into(),
                });
            }
            if let Some((first, _)) = entries.get(key) {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line,
                    reason: format!("duplicate key '{key}' (first defined on line {first})"),
                });
            }
            entries.insert(key.to_string(), (line, value.trim().to_string()));
        }
        Ok(Self { origin: origin.to_string(), entries })
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn error(&self, key: &str, reason: String) -> Error {
        let line = self.entries.get(key).map_or(0, |(l, _)| *l);
        Error::Parse { path: self.origin.clone(), line, reason }
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((_, v)) => v
                .parse::<V>()
                .map(Some)
                .map_err(|_| self.error(key, format!("cannot parse value '{v}' for key '{key}'"))),
        }
    }

    pub fn require<V: FromStr>(&self, key: &str) -> Result<V> {
        self.get(key)?.ok_or_else(|| Error::Parse {
            path: self.origin.clone(),
            line: 0,
            reason: format!("missing required key '{key}'"),
        })
    }

    pub fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Rejects any key not accepted by `allowed`.
    pub fn reject_unknown(&self, allowed: impl Fn(&str) -> bool) -> Result<()> {
        for (key, (line, _)) in &self.entries {
            if !allowed(key) {
                return Err(Error::Parse {
                    path: self.origin.clone(),
                    line: *line,
                    reason: format!("unknown key '{key}'"),
                });
            }
        }
        Ok(())
    }

    /// Distinct indices `i` appearing in keys shaped `prefix.i.field`.
    pub fn indices(&self, prefix: &str) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        let head = format!("{prefix}.");
        for key in self.entries.keys() {
            if let Some(rest) = key.strip_prefix(&head) {
                let idx = rest.split('.').next().unwrap_or("");
                let i: usize = idx
                    .parse()
                    .map_err(|_| self.error(key, format!("bad index in key '{key}'")))?;
                if !out.contains(&i) {
                    out.push(i);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// Builder for writing key/value documents in a stable order.
#[derive(Debug, Default)]
pub struct KvWriter {
    buf: String,
}

impl KvWriter {
    pub fn comment(&mut self, text: &str) -> &mut Self {
        let _ = writeln!(self.buf, "# {text}");
        self
    }

    pub fn entry(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.buf, "{key} = {value}");
        self
    }

    pub fn blank(&mut self) -> &mut Self {
        self.buf.push('\n');
        self
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
