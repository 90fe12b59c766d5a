//! One record per line: tab-separated `key=value` fields.
//!
//! Values escape `\`, tab, newline and carriage return with a backslash so a
//! record never spans lines.

use std::collections::HashMap;

pub(crate) fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn unescape(value: &str) -> Result<String, String> {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(format!("bad escape \\{}", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

pub(crate) fn encode(fields: &[(&str, &str)]) -> String {
    let mut line = String::new();
    for (i, (key, value)) in fields.iter().enumerate() {
        if i > 0 {
            line.push('\t');
        }
        line.push_str(key);
        line.push('=');
        line.push_str(&escape(value));
    }
    line
}

/// Decoded fields of one line, in order, with lookup by key.
#[derive(Debug)]
pub(crate) struct Fields {
    ordered: Vec<(String, String)>,
    index: HashMap<String, usize>,
}

impl Fields {
    pub(crate) fn decode(line: &str) -> Result<Self, String> {
        let mut ordered = Vec::new();
        let mut index = HashMap::new();
        for part in line.split('\t') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("field {part:?} lacks '='"))?;
            if index.insert(key.to_owned(), ordered.len()).is_some() {
                return Err(format!("duplicate field {key:?}"));
            }
            ordered.push((key.to_owned(), unescape(value)?));
        }
        Ok(Fields { ordered, index })
    }

    pub(crate) fn get(&self, key: &str) -> Result<&str, String> {
        self.index
            .get(key)
            .map(|&i| self.ordered[i].1.as_str())
            .ok_or_else(|| format!("missing field {key:?}"))
    }

    pub(crate) fn get_opt(&self, key: &str) -> Option<&str> {
        self.index.get(key).map(|&i| self.ordered[i].1.as_str())
    }

    pub(crate) fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(key)?;
        raw.parse().map_err(|e| format!("field {key:?}: {e}"))
    }
}
