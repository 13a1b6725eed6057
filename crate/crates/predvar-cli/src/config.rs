//! Flat key-value config files with an include mechanism.
//!
//! Lines are `key = value`; `#` starts a comment; `include = path` splices
//! another file (relative to the including file) at that point. Later lines
//! override earlier ones, and command-line flags override everything. Every
//! emitted manifest is itself a valid config, so any run can be replayed
//! with `--config <manifest>`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use predvar::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    map: HashMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let mut cfg = Config::default();
        let mut stack = Vec::new();
        cfg.load_into(path, &mut stack)?;
        Ok(cfg)
    }

    fn load_into(&mut self, path: &Path, stack: &mut Vec<PathBuf>) -> Result<()> {
        let canonical = path
            .canonicalize()
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if stack.contains(&canonical) {
            return Err(Error::Config(format!(
                "config include cycle at {}",
                path.display()
            )));
        }
        stack.push(canonical);
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: "expected `key = value`".to_owned(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key == "include" {
                let included = path
                    .parent()
                    .unwrap_or_else(|| Path::new("."))
                    .join(value);
                self.load_into(&included, stack)?;
            } else {
                self.map.insert(key.to_owned(), value.to_owned());
            }
        }
        stack.pop();
        Ok(())
    }

    /// Flag wins, then config, then default; error when none is available.
    pub fn resolve<T: FromStr + Clone>(
        &self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.map.get(key) {
            return raw
                .parse()
                .map_err(|_| Error::Config(format!("bad value {raw:?} for config key {key:?}")));
        }
        default.ok_or_else(|| Error::Config(format!("missing required option --{key}")))
    }

    /// Flag wins, then config; `None` when neither is present.
    pub fn resolve_opt<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad value {raw:?} for config key {key:?}"))),
            None => Ok(None),
        }
    }
}

/// Parse a comma-separated list.
pub fn parse_list<T: FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad {what} entry {tok:?}")))
        })
        .collect()
}
