//! Open documents as seen by the hub.
//!
//! LSP positions count UTF-16 code units; the store keeps UTF-8 lines and
//! converts at the boundary.

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    /// UTF-16 code units from the start of the line.
    pub character: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Range {
    pub start: Position,
    pub end: Position,
}

#[derive(Debug, Clone)]
pub enum Change {
    Full(String),
    Incremental { range: Range, text: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub version: i64,
    pub lines: Vec<String>,
}

impl Document {
    pub fn new(version: i64, text: &str) -> Document {
        Document {
            version,
            lines: split_lines(text),
        }
    }

    pub fn text(&self) -> String {
        self.lines.join("\n")
    }

    fn offset(&self, pos: Position) -> usize {
        let line = pos.line.min(self.lines.len().saturating_sub(1));
        let mut offset: usize = self.lines[..line].iter().map(|l| l.len() + 1).sum();
        if pos.line >= self.lines.len() {
            // Past the end: clamp to the end of the text.
            return offset + self.lines[line].len();
        }
        offset += utf16_to_byte(&self.lines[line], pos.character);
        offset
    }

    fn apply(&mut self, change: &Change) {
        match change {
            Change::Full(text) => self.lines = split_lines(text),
            Change::Incremental { range, text } => {
                let mut whole = self.text();
                let start = self.offset(range.start);
                let end = self.offset(range.end).max(start);
                whole.replace_range(start..end, text);
                self.lines = split_lines(&whole);
            }
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("document {0} is not open")]
    NotOpen(String),
    #[error("version {got} of {uri} is not newer than {have}")]
    StaleVersion { uri: String, have: i64, got: i64 },
}

#[derive(Debug, Default)]
pub struct DocumentStore {
    docs: HashMap<String, Document>,
}

impl DocumentStore {
    pub fn new() -> DocumentStore {
        DocumentStore::default()
    }

    pub fn open(&mut self, uri: &str, version: i64, text: &str) {
        self.docs
            .insert(uri.to_string(), Document::new(version, text));
    }

    /// Applies `changes` in order. Versions must strictly increase; a stale
    /// change leaves the document untouched.
    pub fn change(
        &mut self,
        uri: &str,
        version: i64,
        changes: &[Change],
    ) -> Result<(), StoreError> {
        let doc = self
            .docs
            .get_mut(uri)
            .ok_or_else(|| StoreError::NotOpen(uri.to_string()))?;
        if version <= doc.version {
            return Err(StoreError::StaleVersion {
                uri: uri.to_string(),
                have: doc.version,
                got: version,
            });
        }
        for change in changes {
            doc.apply(change);
        }
        doc.version = version;
        Ok(())
    }

    pub fn close(&mut self, uri: &str) -> Option<Document> {
        self.docs.remove(uri)
    }

    pub fn get(&self, uri: &str) -> Option<&Document> {
        self.docs.get(uri)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Document)> {
        self.docs.iter()
    }
}

/// Splits on `\n`, dropping a `\r` before it. Always yields at least one line.
fn split_lines(text: &str) -> Vec<String> {
    text.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

/// Byte offset in `line` of a UTF-16 column, clamped to the line end.
pub fn utf16_to_byte(line: &str, character: usize) -> usize {
    let mut units = 0;
    for (i, c) in line.char_indices() {
        if units >= character {
            return i;
        }
        units += c.len_utf16();
    }
    line.len()
}

/// UTF-16 column of a byte offset in `line`.
pub fn byte_to_utf16(line: &str, byte: usize) -> usize {
    let byte = byte.min(line.len());
    line.char_indices()
        .take_while(|(i, _)| *i < byte)
        .map(|(_, c)| c.len_utf16())
        .sum()
}
