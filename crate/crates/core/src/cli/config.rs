use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};

/// Flat key/value run configuration. Every lookup records the resolved value;
/// [`Params::finish`] rejects keys nobody asked for.
#[derive(Debug, Default, Clone)]
pub struct Params {
    raw: BTreeMap<String, String>,
    resolved: BTreeMap<String, Value>,
}

fn parse_ini(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if line.starts_with('[') {
            return Err(Error::Config(format!("line {}: sections are not supported", i + 1)));
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("duplicate key {k}")));
        }
    }
    Ok(out)
}

fn parse_json(text: &str) -> Result<BTreeMap<String, String>> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Config("JSON config must be a flat object".into()))?;
    obj.iter()
        .map(|(k, v)| {
            let s = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                _ => return Err(Error::Config(format!("key {k}: only scalar values are allowed"))),
            };
            Ok((k.clone(), s))
        })
        .collect()
}

impl Params {
    pub fn from_text(text: &str) -> Result<Self> {
        let raw = if text.trim_start().starts_with('{') {
            parse_json(text)?
        } else {
            parse_ini(text)?
        };
        Ok(Self {
            raw,
            resolved: BTreeMap::new(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got {assignment:?}")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config("--set with empty key".into()));
        }
        self.raw.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.raw.insert(key.to_string(), value.to_string());
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.raw.remove(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config(format!("key {key}: cannot parse {s:?}"))),
        }
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.take::<f64>(key)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), Value::from(v));
        Ok(v)
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        let v = self.take::<usize>(key)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), Value::from(v));
        Ok(v)
    }

    pub fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        let v = self.take::<u64>(key)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), Value::from(v));
        Ok(v)
    }

    pub fn string(&mut self, key: &str, default: &str) -> Result<String> {
        let v = self.take::<String>(key)?.unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), Value::from(v.clone()));
        Ok(v)
    }

    pub fn optional_string(&mut self, key: &str) -> Result<Option<String>> {
        let v = self.take::<String>(key)?;
        if let Some(s) = &v {
            self.resolved.insert(key.to_string(), Value::from(s.clone()));
        }
        Ok(v)
    }

    /// Fails on any key that was supplied but never read.
    pub fn finish(self) -> Result<BTreeMap<String, Value>> {
        if let Some(k) = self.raw.keys().next() {
            let all: Vec<&String> = self.raw.keys().collect();
            return Err(Error::Config(format!(
                "unknown key {k:?} (unrecognized: {})",
                all.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            )));
        }
        Ok(self.resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ini_and_json_agree() {
        let mut a = Params::from_text("# c\nL = 20\nphi=1.5\n\n; x\nname = gauss\n").unwrap();
        let mut b = Params::from_text(r#"{"L": 20, "phi": 1.5, "name": "gauss"}"#).unwrap();
        for p in [&mut a, &mut b] {
            assert_eq!(p.f64("L", 0.0).unwrap(), 20.0);
            assert_eq!(p.f64("phi", 0.0).unwrap(), 1.5);
            assert_eq!(p.string("name", "").unwrap(), "gauss");
            assert_eq!(p.f64("missing", 7.0).unwrap(), 7.0);
        }
        assert_eq!(a.finish().unwrap()["L"], Value::from(20.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Params::from_text("[s]\nx=1").is_err());
        assert!(Params::from_text("x=1\nx=2").is_err());
        assert!(Params::from_text("novalue").is_err());
        assert!(Params::from_text(r#"{"a": [1]}"#).is_err());
        let mut p = Params::from_text("typo = 3").unwrap();
        p.f64("L", 1.0).unwrap();
        assert!(matches!(p.finish(), Err(Error::Config(_))));
        let mut p = Params::default();
        p.set("L=abc").unwrap();
        assert!(p.f64("L", 1.0).is_err());
    }
}
