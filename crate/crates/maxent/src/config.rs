//! Run configuration: `key = value` lines grouped under `[section]` headers.
//!
//! Keys are addressed as `section.key` (top-level keys have no prefix). Every
//! lookup is recorded together with its resolved value, so that defaults end up
//! in the manifest, and [`Config::finish`] rejects keys nobody asked for.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug)]
pub struct Config {
    path: String,
    dir: PathBuf,
    entries: BTreeMap<String, Entry>,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &path.display().to_string(), dir)
    }

    /// Parses config text; `dir` anchors relative file paths.
    pub fn parse(text: &str, path: &str, dir: PathBuf) -> Result<Self> {
        let err = |line: usize, message: String| CliError::Config { path: path.to_string(), line, message };
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err(line, format!("malformed section header `{content}`")))?.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return Err(err(line, format!("bad section name `{name}`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(line, format!("bad key `{key}`")));
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            if let Some(prev) = entries.get(&full) {
                let prev: &Entry = prev;
                return Err(err(line, format!("duplicate key `{full}` (first set on line {})", prev.line)));
            }
            let value = value.trim();
            let value = value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value);
            entries.insert(full, Entry { value: value.to_string(), line });
        }
        Ok(Self { path: path.to_string(), dir, entries, resolved: RefCell::new(BTreeMap::new()) })
    }

    /// An empty configuration, for commands run from flags alone.
    pub fn empty() -> Self {
        Self { path: "<none>".into(), dir: PathBuf::new(), entries: BTreeMap::new(), resolved: RefCell::new(BTreeMap::new()) }
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    fn error(&self, key: &str, message: String) -> CliError {
        let line = self.entries.get(key).map_or(0, |e| e.line);
        CliError::Config { path: self.path.clone(), line, message }
    }

    /// Overrides (or sets) a key, e.g. from a command-line flag.
    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), Entry { value, line: 0 });
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn record(&self, key: &str, value: String) {
        self.resolved.borrow_mut().insert(key.to_string(), value);
    }

    fn parse_value<T: FromStr>(&self, key: &str, value: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        value.parse().map_err(|e| self.error(key, format!("bad value `{value}` for `{key}`: {e}")))
    }

    pub fn get<T: FromStr + ToString>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = match self.raw(key) {
            Some(raw) => self.parse_value(key, raw)?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn required<T: FromStr + ToString>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self
            .raw(key)
            .ok_or_else(|| CliError::Config { path: self.path.clone(), line: 0, message: format!("missing required key `{key}`") })?;
        let v: T = self.parse_value(key, raw)?;
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn optional<T: FromStr + ToString>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(raw) => {
                let v: T = self.parse_value(key, raw)?;
                self.record(key, v.to_string());
                Ok(Some(v))
            }
        }
    }

    /// Whitespace- or comma-separated list.
    pub fn list<T: FromStr + ToString>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let v = match self.raw(key) {
            Some(raw) => raw
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| self.parse_value(key, s))
                .collect::<Result<Vec<T>>>()?,
            None => default,
        };
        self.record(key, v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
        Ok(v)
    }

    /// One of `choices`.
    pub fn choice(&self, key: &str, default: &str, choices: &[&str]) -> Result<String> {
        let v = self.raw(key).unwrap_or(default).to_string();
        if !choices.contains(&v.as_str()) {
            return Err(self.error(key, format!("`{key}` must be one of {}, got `{v}`", choices.join("|"))));
        }
        self.record(key, v.clone());
        Ok(v)
    }

    /// A path relative to the config file's directory.
    pub fn path_value(&self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.optional::<String>(key)?.map(|p| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                self.dir.join(p)
            }
        }))
    }

    /// A list of paths, each relative to the config file's directory.
    pub fn path_list(&self, key: &str) -> Result<Vec<PathBuf>> {
        Ok(self.list::<String>(key, vec![])?.into_iter().map(|p| self.dir.join(p)).collect())
    }

    /// Fails on the first key that no lookup consumed.
    pub fn finish(&self) -> Result<()> {
        let resolved = self.resolved.borrow();
        match self.entries.iter().find(|(k, _)| !resolved.contains_key(*k)) {
            Some((key, entry)) => Err(CliError::Config {
                path: self.path.clone(),
                line: entry.line,
                message: format!("unknown key `{key}`"),
            }),
            None => Ok(()),
        }
    }

    /// Every key read so far with its resolved value, defaults included.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config> {
        Config::parse(text, "test.cfg", PathBuf::new())
    }

    #[test]
    fn sections_and_defaults() {
        let c = parse("seed = 7\n# comment\n[grid]\npoints = 20 # trailing\n").unwrap();
        assert_eq!(c.required::<u64>("seed").unwrap(), 7);
        assert_eq!(c.get("grid.points", 200usize).unwrap(), 20);
        assert_eq!(c.get("grid.t_max", 7.0f64).unwrap(), 7.0);
        c.finish().unwrap();
        assert_eq!(c.resolved().get("grid.t_max").map(String::as_str), Some("7"));
    }

    #[test]
    fn unknown_keys_carry_their_line() {
        let c = parse("seed = 1\n\n[grid]\npionts = 3\n").unwrap();
        c.required::<u64>("seed").unwrap();
        match c.finish().unwrap_err() {
            CliError::Config { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("grid.pionts"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(parse("seed 1").unwrap_err(), CliError::Config { line: 1, .. }));
        assert!(matches!(parse("a = 1\na = 2").unwrap_err(), CliError::Config { line: 2, .. }));
        assert!(matches!(parse("[grid").unwrap_err(), CliError::Config { line: 1, .. }));
        let c = parse("x = abc").unwrap();
        assert!(matches!(c.get("x", 1u32).unwrap_err(), CliError::Config { line: 1, .. }));
        assert!(c.choice("x", "a", &["a", "b"]).is_err());
        assert!(parse("").unwrap().required::<u64>("seed").is_err());
    }

    #[test]
    fn lists() {
        let c = parse("exclude = 3, 7 9").unwrap();
        assert_eq!(c.list::<usize>("exclude", vec![]).unwrap(), vec![3, 7, 9]);
        assert_eq!(c.list::<usize>("other", vec![1]).unwrap(), vec![1]);
    }
}
