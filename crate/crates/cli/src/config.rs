//! Flat key-value configuration files and flag/file/default resolution.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::CliError;

/// Parsed `key = value` configuration file; keys match long flag names.
#[derive(Debug, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config: cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("config: {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        let mut table = toml::Table::new();
        for (k, v) in raw {
            if v.is_table() {
                return Err(format!("key {k:?}: nested tables are not supported"));
            }
            table.insert(k.replace('-', "_"), v);
        }
        Ok(ConfigFile { table })
    }

    fn raw(&self, key: &str) -> Option<&toml::Value> {
        self.table.get(key)
    }

    pub fn keys(&self) -> BTreeSet<String> {
        self.table.keys().cloned().collect()
    }
}

/// Resolves each setting as flag, then file, then default; remembers which keys were read.
pub struct Resolver<'a> {
    file: &'a ConfigFile,
    seen: BTreeSet<String>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Resolver { file, seen: BTreeSet::new() }
    }

    fn file_value<T: DeserializeOwned>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        self.seen.insert(key.to_string());
        match self.file.raw(key) {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e: toml::de::Error| CliError::Usage(format!("config: key {key:?}: {}", e.message()))),
        }
    }

    pub fn get<T: DeserializeOwned>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        let file = self.file_value(key)?;
        Ok(flag.or(file).unwrap_or(default))
    }

    pub fn optional<T: DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let file = self.file_value(key)?;
        Ok(flag.or(file))
    }

    pub fn flag(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let file: Option<bool> = self.file_value(key)?;
        Ok(flag || file.unwrap_or(false))
    }

    /// A list setting; the file may hold a string spec, a number or an array of numbers.
    pub fn list(&mut self, key: &str, flag: Option<&str>, default: &str) -> Result<Vec<f64>, CliError> {
        self.seen.insert(key.to_string());
        let spec = match (flag, self.file.raw(key)) {
            (Some(s), _) => s.to_string(),
            (None, Some(toml::Value::String(s))) => s.clone(),
            (None, Some(toml::Value::Integer(i))) => i.to_string(),
            (None, Some(toml::Value::Float(f))) => f.to_string(),
            (None, Some(toml::Value::Array(a))) => a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
            (None, Some(other)) => return Err(CliError::Usage(format!("config: key {key:?}: unsupported value {other}"))),
            (None, None) => default.to_string(),
        };
        parse_list(&spec).map_err(|e| CliError::Usage(format!("--{}: {e}", key.replace('_', "-"))))
    }

    /// File keys that no resolver call asked for.
    pub fn unused(&self) -> Vec<String> {
        self.file.keys().difference(&self.seen).cloned().collect()
    }
}

/// Parses `a`, `a,b,c`, `a:b` (unit steps) or `a:b:n` (n points, inclusive).
pub fn parse_list(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {:?}", s.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("not finite: {s:?}"))
        }
    };
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("empty list".into());
    }
    let out: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            [a, b] => {
                let (a, b) = (num(a)?, num(b)?);
                let n = if b >= a { (b - a + 1e-9).floor() as usize + 1 } else { 0 };
                (0..n).map(|k| a + k as f64).collect()
            }
            [a, b, n] => {
                let (a, b) = (num(a)?, num(b)?);
                let n: usize = n.trim().parse().map_err(|_| format!("bad count {n:?}"))?;
                match n {
                    0 => vec![],
                    1 => vec![a],
                    _ if b < a => vec![],
                    _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
                }
            }
            _ => return Err(format!("bad range {spec:?}")),
        }
    } else {
        spec.split(',').map(num).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(format!("range {spec:?} is empty"));
    }
    Ok(out)
}
