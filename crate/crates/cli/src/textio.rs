//! Structured key-value text shared by run configurations and material
//! definition files.
//!
//! Format: `key = value` lines, optional `[section]` headers, `#` comments.
//! Values are scalars, quoted-free strings, bracketed lists `[a, b, c]`, or
//! named lists `a:1, b:2`. Parsing is strict downstream: consumers declare the
//! keys they know and everything else is an error, with a nearest-key
//! suggestion, because silent unit mistakes (um vs nm) are the chief hazard in
//! these files.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

/// One `key = value` entry with its source line for error reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub value: String,
}

/// Parsed document: top-level entries plus named sections, insertion order
/// irrelevant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub top: BTreeMap<String, Entry>,
    pub sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let mut doc = Document::default();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ParseError {
                line: line_no,
                message: format!("malformed section header `{line}`"),
            })?;
            let name = name.trim().to_string();
            if doc.sections.contains_key(&name) {
                return Err(ParseError {
                    line: line_no,
                    message: format!("duplicate section `[{name}]`"),
                });
            }
            doc.sections.insert(name.clone(), BTreeMap::new());
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ParseError {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim().to_string();
        let entry = Entry {
            line: line_no,
            value: value.trim().to_string(),
        };
        let map = match &current {
            Some(section) => doc.sections.get_mut(section).expect("section exists"),
            None => &mut doc.top,
        };
        if map.insert(key.clone(), entry).is_some() {
            return Err(ParseError {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(doc)
}

pub fn parse_f64(entry: &Entry, key: &str) -> Result<f64, ParseError> {
    entry.value.parse::<f64>().map_err(|_| ParseError {
        line: entry.line,
        message: format!("`{key}` must be a number, got `{}`", entry.value),
    })
}

pub fn parse_u64(entry: &Entry, key: &str) -> Result<u64, ParseError> {
    entry.value.parse::<u64>().map_err(|_| ParseError {
        line: entry.line,
        message: format!("`{key}` must be a non-negative integer, got `{}`", entry.value),
    })
}

/// `[a, b, c]` to numbers.
pub fn parse_list(entry: &Entry, key: &str) -> Result<Vec<f64>, ParseError> {
    let inner = entry
        .value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| ParseError {
            line: entry.line,
            message: format!("`{key}` must be a bracketed list like [1.0, 2.0]"),
        })?;
    inner
        .split(',')
        .map(|item| {
            item.trim().parse::<f64>().map_err(|_| ParseError {
                line: entry.line,
                message: format!("`{key}` contains a non-numeric item `{}`", item.trim()),
            })
        })
        .collect()
}

/// `name:value, name:value` pairs.
pub fn parse_named_list(entry: &Entry, key: &str) -> Result<Vec<(String, f64)>, ParseError> {
    entry
        .value
        .split(',')
        .map(|item| {
            let (name, value) = item.split_once(':').ok_or_else(|| ParseError {
                line: entry.line,
                message: format!("`{key}` items must look like `name:value`, got `{}`", item.trim()),
            })?;
            let value = value.trim().parse::<f64>().map_err(|_| ParseError {
                line: entry.line,
                message: format!("`{key}` item `{}` has a non-numeric value", name.trim()),
            })?;
            Ok((name.trim().to_string(), value))
        })
        .collect()
}

/// Reject keys outside `known`, suggesting the closest known spelling.
pub fn reject_unknown_keys(
    entries: &BTreeMap<String, Entry>,
    known: &[&str],
    scope: &str,
) -> Result<(), ParseError> {
    for (key, entry) in entries {
        if !known.contains(&key.as_str()) {
            let suggestion = nearest(known, key)
                .map(|k| format!("; did you mean `{k}`?"))
                .unwrap_or_default();
            return Err(ParseError {
                line: entry.line,
                message: format!("unknown key `{key}` in {scope}{suggestion}"),
            });
        }
    }
    Ok(())
}

fn nearest<'a>(known: &[&'a str], key: &str) -> Option<&'a str> {
    known
        .iter()
        .map(|k| (levenshtein(k, key), *k))
        .filter(|(d, _)| *d <= 3)
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut row = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        row[0] = i;
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            row[j] = (prev[j] + 1).min(row[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}
