//! `key = value` documents split into `[section]` blocks, `#` comments.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    /// Collects every syntax problem before failing.
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        let mut errors = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            if let Some(rest) = l.strip_prefix('[') {
                match rest.strip_suffix(']') {
                    Some(name) if !name.trim().is_empty() => {
                        let name = name.split_whitespace().collect::<Vec<_>>().join(" ");
                        if doc.section(&name).is_some() {
                            errors.push(format!("line {line}: duplicate section [{name}]"));
                        }
                        doc.sections.push(Section { name, line, entries: Vec::new() });
                    }
                    _ => errors.push(format!("line {line}: malformed section header `{l}`")),
                }
                continue;
            }
            let Some((k, v)) = l.split_once('=') else {
                errors.push(format!("line {line}: expected `key = value`, found `{l}`"));
                continue;
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                errors.push(format!("line {line}: empty key or value"));
                continue;
            }
            let Some(sec) = doc.sections.last_mut() else {
                errors.push(format!("line {line}: `{k}` appears before any [section]"));
                continue;
            };
            if sec.get(k).is_some() {
                errors.push(format!("line {line}: duplicate key `{k}` in [{}]", sec.name));
                continue;
            }
            sec.entries.push(Entry { key: k.to_string(), value: v.to_string(), line });
        }
        if errors.is_empty() {
            Ok(doc)
        } else if errors.len() == 1 {
            let line = errors[0].trim_start_matches("line ").split(':').next().and_then(|s| s.parse().ok()).unwrap_or(0);
            Err(Error::Parse { line, msg: errors[0].splitn(2, ": ").nth(1).unwrap_or("").to_string() })
        } else {
            Err(Error::Validation(errors))
        }
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Typed access to a document that records every problem it meets.
pub struct Reader<'a> {
    pub doc: &'a Document,
    pub errors: Vec<String>,
    used: Vec<(String, String)>,
}

impl<'a> Reader<'a> {
    pub fn new(doc: &'a Document) -> Self {
        Self { doc, errors: Vec::new(), used: Vec::new() }
    }

    pub fn raw(&mut self, section: &str, key: &str) -> Option<&'a Entry> {
        self.used.push((section.to_string(), key.to_string()));
        self.doc.section(section)?.get(key)
    }

    pub fn error(&mut self, e: Option<&Entry>, section: &str, key: &str, msg: impl std::fmt::Display) {
        match e {
            Some(e) => self.errors.push(format!("line {}: [{section}] {key}: {msg}", e.line)),
            None => self.errors.push(format!("[{section}] {key}: {msg}")),
        }
    }

    pub fn string(&mut self, section: &str, key: &str) -> Option<String> {
        self.raw(section, key).map(|e| e.value.clone())
    }

    pub fn numbers(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let e = self.raw(section, key)?;
        match parse_numbers(&e.value) {
            Ok(v) => Some(v),
            Err(msg) => {
                self.error(Some(e), section, key, msg);
                None
            }
        }
    }

    pub fn f64(&mut self, section: &str, key: &str) -> Option<f64> {
        let e = self.raw(section, key)?;
        let v = self.numbers(section, key)?;
        if v.len() != 1 {
            self.error(Some(e), section, key, format!("expected one number, found {}", v.len()));
            return None;
        }
        Some(v[0])
    }

    /// A strictly positive number.
    pub fn positive(&mut self, section: &str, key: &str) -> Option<f64> {
        let e = self.raw(section, key);
        let v = self.f64(section, key)?;
        if !(v > 0.0) {
            self.error(e, section, key, format!("must be positive, got {v}"));
            return None;
        }
        Some(v)
    }

    pub fn usize(&mut self, section: &str, key: &str) -> Option<usize> {
        let e = self.raw(section, key)?;
        match e.value.parse::<usize>() {
            Ok(v) => Some(v),
            Err(err) => {
                self.error(Some(e), section, key, format!("expected a non-negative integer: {err}"));
                None
            }
        }
    }

    pub fn require<T>(&mut self, v: Option<T>, section: &str, key: &str) -> Option<T> {
        if v.is_none() && self.raw(section, key).is_none() {
            self.error(None, section, key, "missing");
        }
        v
    }

    pub fn req_f64(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.f64(section, key);
        self.require(v, section, key)
    }

    pub fn req_positive(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.positive(section, key);
        self.require(v, section, key)
    }

    /// Reports keys never looked at and sections not in `known`.
    pub fn finish_unknown(&mut self, known_sections: &[&str]) {
        for s in &self.doc.sections {
            let known = known_sections.iter().any(|k| *k == s.name || (k.ends_with('*') && s.name.starts_with(&k[..k.len() - 1])));
            if !known {
                self.errors.push(format!("line {}: unknown section [{}]", s.line, s.name));
                continue;
            }
            for e in &s.entries {
                if !self.used.iter().any(|(sec, key)| *sec == s.name && *key == e.key) {
                    self.errors.push(format!("line {}: unknown key `{}` in [{}]", e.line, e.key, s.name));
                }
            }
        }
    }
}

pub fn parse_numbers(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("`{t}` is not a number ({e})")))
        .collect()
}
