//! INI-style run configuration: `[section]` headers, `key = value` lines,
//! `#` or `;` comments. Every error carries its line number and unknown
//! keys are rejected.

use crate::error::{Error, Result};
use std::cell::RefCell;
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, Default)]
pub struct Config {
    pub sections: Vec<Section>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config { line, msg: "unterminated section header".into() })?
                    .trim();
                if name.is_empty() {
                    return Err(Error::Config { line, msg: "empty section name".into() });
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(Error::Config { line, msg: format!("duplicate section [{name}]") });
                }
                sections.push(Section { name: name.into(), line, entries: Vec::new() });
                continue;
            }
            let (key, value) =
                body.split_once('=').ok_or_else(|| Error::Config { line, msg: format!("expected `key = value`, got `{body}`") })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config { line, msg: "empty key".into() });
            }
            let section =
                sections.last_mut().ok_or_else(|| Error::Config { line, msg: "key outside of any section".into() })?;
            if section.entries.iter().any(|e| e.key == key) {
                return Err(Error::Config { line, msg: format!("duplicate key `{key}`") });
            }
            section.entries.push(Entry { key: key.into(), value: value.trim().into(), line });
        }
        Ok(Self { sections })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Rejects sections outside `allowed`.
    pub fn check_sections(&self, allowed: &[&str]) -> Result<()> {
        match self.sections.iter().find(|s| !allowed.contains(&s.name.as_str())) {
            Some(s) => Err(Error::Config { line: s.line, msg: format!("unknown section [{}]", s.name) }),
            None => Ok(()),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Typed access to one section; [`finish`](Self::finish) reports keys that
/// were never read.
pub struct Reader<'a> {
    section: Option<&'a Section>,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Reader<'a> {
    pub fn new(config: &'a Config, name: &str) -> Self {
        Self { section: config.section(name), used: RefCell::new(BTreeSet::new()) }
    }

    pub fn exists(&self) -> bool {
        self.section.is_some()
    }

    fn entry(&self, key: &str) -> Option<&'a Entry> {
        self.used.borrow_mut().insert(key.into());
        self.section.and_then(|s| s.entries.iter().find(|e| e.key == key))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| Error::Config { line: e.line, msg: format!("`{key}` must be {what}, got `{}`", e.value) }),
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parse(key, "a number")?.unwrap_or(default))
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parse(key, "a non-negative integer")?.unwrap_or(default))
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.entry(key).map(|e| e.value.clone()).unwrap_or_else(|| default.into())
    }

    /// Comma-separated numbers.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.entry(key) {
            None => Ok(default.to_vec()),
            Some(e) if e.value.is_empty() => Ok(Vec::new()),
            Some(e) => e
                .value
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::Config { line: e.line, msg: format!("`{key}` entry `{}` is not a number", t.trim()) })
                })
                .collect(),
        }
    }

    /// Line of `key`, or of the section header, for error messages.
    pub fn line_of(&self, key: &str) -> usize {
        self.section
            .map(|s| s.entries.iter().find(|e| e.key == key).map(|e| e.line).unwrap_or(s.line))
            .unwrap_or(0)
    }

    pub fn finish(&self) -> Result<()> {
        if let Some(s) = self.section {
            let used = self.used.borrow();
            if let Some(e) = s.entries.iter().find(|e| !used.contains(&e.key)) {
                return Err(Error::Config { line: e.line, msg: format!("unknown key `{}` in [{}]", e.key, s.name) });
            }
        }
        Ok(())
    }
}
