//! Line-oriented stanza format shared by every on-disk artifact.
//!
//! All structured text files (mutator packs, queue metadata, campaign state,
//! issue fixtures, classifier tables) use the same shape: UTF-8, `#` comment
//! lines, `[section]` headers, and `key = value` fields. Values run to the
//! end of the line and are not trimmed beyond the single space after `=`, so
//! regex patterns keep their trailing whitespace.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("line {line}: expected `key = value`, got {got:?}")]
    BadField { line: usize, got: String },
    #[error("line {line}: unterminated section header")]
    BadHeader { line: usize },
}

/// One `[name]` block (or the preamble before the first header, name = "").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stanza {
    pub name: String,
    /// 1-based line of the `[name]` header (0 for the preamble).
    pub line: usize,
    /// Fields in file order; keys may repeat.
    pub fields: Vec<Field>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl Stanza {
    pub fn new(name: &str) -> Self {
        Stanza { name: name.to_string(), line: 0, fields: Vec::new() }
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.fields.push(Field { key: key.to_string(), value: value.into(), line: 0 });
    }

    /// First value for `key`, if any.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|f| f.key == key).map(|f| f.value.as_str())
    }

    /// All values for `key`, in order.
    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.fields.iter().filter(|f| f.key == key).map(|f| f.value.as_str()).collect()
    }
}

/// Parse a document into its preamble (if it has top-level fields) and
/// sections. Comment and blank lines are skipped everywhere.
pub fn parse(text: &str) -> Result<Vec<Stanza>, TextError> {
    let mut stanzas: Vec<Stanza> = Vec::new();
    let mut current = Stanza::new("");
    let mut saw_any = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.starts_with('[') {
            let Some(end) = trimmed.find(']') else {
                return Err(TextError::BadHeader { line: line_no });
            };
            if saw_any || !current.fields.is_empty() {
                stanzas.push(current);
            }
            current = Stanza::new(trimmed[1..end].trim());
            current.line = line_no;
            saw_any = true;
            continue;
        }
        let Some(eq) = raw.find('=') else {
            return Err(TextError::BadField { line: line_no, got: raw.to_string() });
        };
        let key = raw[..eq].trim().to_string();
        if key.is_empty() {
            return Err(TextError::BadField { line: line_no, got: raw.to_string() });
        }
        let mut value = &raw[eq + 1..];
        value = value.strip_prefix(' ').unwrap_or(value);
        let value = value.strip_suffix('\r').unwrap_or(value);
        current.fields.push(Field { key, value: value.to_string(), line: line_no });
    }
    if saw_any || !current.fields.is_empty() {
        stanzas.push(current);
    }
    Ok(stanzas)
}

/// Render stanzas back to text. Preamble stanzas (empty name) emit bare
/// fields; everything round-trips through [`parse`].
pub fn render(stanzas: &[Stanza]) -> String {
    let mut out = String::new();
    for stanza in stanzas {
        if !stanza.name.is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push('[');
            out.push_str(&stanza.name);
            out.push_str("]\n");
        }
        for field in &stanza.fields {
            out.push_str(&field.key);
            out.push_str(" = ");
            out.push_str(&field.value);
            out.push('\n');
        }
    }
    out
}
