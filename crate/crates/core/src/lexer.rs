//! Tokenizer for one DSL payload.

use std::collections::BTreeSet;

use crate::error::{ErrorKind, Expected, ParseError};

/// Reserved words. Case-sensitive; none of them can be used as an identifier.
pub const KEYWORDS: &[&str] = &[
    "load",
    "as",
    "on",
    "save",
    "to",
    "select_cols",
    "select_rows",
    "drop_cols",
    "drop_rows",
    "group_by",
    "apply",
    "on_missing",
    "fill_with",
    "replace",
    "by",
    "apply_fun",
    "append_col",
    "append_row",
    "default",
    "sort_by",
    "drop_duplicates",
    "rename_cols",
    "show",
    "describe",
    "return_top_N",
    "count",
    "start_session",
    "named",
    "stop_session",
    "schema",
    "of",
    "with_schema",
    "target_code",
    "and",
    "or",
    "in",
    "not",
];

/// Multi-character operators first so the longest match wins.
pub const PUNCTUATION: &[&str] = &["==", "!=", "<=", ">=", "=", "<", ">", ":", ",", "[", "]"];

pub fn is_reserved(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    Str,
    Number,
    Punct,
    Eol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Source text of the token; string tokens keep their quotes.
    pub text: String,
    /// Byte columns `[start, end)` in the payload.
    pub span: (usize, usize),
}

impl Token {
    pub fn start(&self) -> usize {
        self.span.0
    }

    pub fn end(&self) -> usize {
        self.span.1
    }

    /// Content of a string token with quotes removed and escapes resolved.
    pub fn string_value(&self) -> String {
        let inner = &self.text[1..self.text.len() - 1];
        let mut out = String::with_capacity(inner.len());
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            if c == '\\' {
                if let Some(next) = chars.next() {
                    if next != '\'' && next != '\\' {
                        out.push('\\');
                    }
                    out.push(next);
                    continue;
                }
            }
            out.push(c);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub position: usize,
    pub kind: ErrorKind,
    pub found: String,
}

/// Lexes as far as possible. Returns the tokens before the first bad
/// character together with the error, if any. No end-of-line token.
pub(crate) fn lex(payload: &str) -> (Vec<Token>, Option<LexError>) {
    let bytes = payload.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;

    while pos < bytes.len() {
        let b = bytes[pos];
        if b == b' ' || b == b'\t' || b == b'\r' {
            pos += 1;
            continue;
        }
        let start = pos;

        if b.is_ascii_alphabetic() || b == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            let text = &payload[start..pos];
            let kind = if is_reserved(text) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            tokens.push(token(kind, payload, start, pos));
            continue;
        }

        let signed =
            (b == b'-' || b == b'+') && bytes.get(pos + 1).is_some_and(|d| d.is_ascii_digit());
        if b.is_ascii_digit() || signed {
            pos += 1;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if bytes.get(pos) == Some(&b'.')
                && bytes.get(pos + 1).is_some_and(|d| d.is_ascii_digit())
            {
                pos += 1;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            tokens.push(token(TokenKind::Number, payload, start, pos));
            continue;
        }

        if b == b'\'' {
            pos += 1;
            let mut closed = false;
            while pos < bytes.len() {
                match bytes[pos] {
                    b'\\' if pos + 1 < bytes.len() => pos += 2,
                    b'\'' => {
                        pos += 1;
                        closed = true;
                        break;
                    }
                    _ => pos += 1,
                }
            }
            if !closed {
                return (
                    tokens,
                    Some(LexError {
                        position: start,
                        kind: ErrorKind::UnterminatedString,
                        found: payload[start..].to_string(),
                    }),
                );
            }
            tokens.push(token(TokenKind::Str, payload, start, pos));
            continue;
        }

        if let Some(p) = PUNCTUATION.iter().find(|p| payload[pos..].starts_with(**p)) {
            pos += p.len();
            tokens.push(token(TokenKind::Punct, payload, start, pos));
            continue;
        }

        let c = payload[pos..].chars().next().unwrap_or('\u{fffd}');
        return (
            tokens,
            Some(LexError {
                position: start,
                kind: ErrorKind::IllegalCharacter(c),
                found: c.to_string(),
            }),
        );
    }

    (tokens, None)
}

fn token(kind: TokenKind, payload: &str, start: usize, end: usize) -> Token {
    Token {
        kind,
        text: payload[start..end].to_string(),
        span: (start, end),
    }
}

/// Splits `payload` into tokens, failing at the first illegal character or
/// unterminated string.
pub fn tokenize(payload: &str) -> Result<Vec<Token>, ParseError> {
    let (tokens, err) = lex(payload);
    match err {
        None => Ok(tokens),
        Some(err) => {
            let expected: BTreeSet<Expected> = match err.kind {
                ErrorKind::UnterminatedString => [Expected::ClosingQuote].into(),
                _ => [
                    Expected::Identifier,
                    Expected::StringLiteral,
                    Expected::Number,
                ]
                .into(),
            };
            Err(ParseError {
                position: err.position,
                found: err.found,
                expected,
                kind: err.kind,
            })
        }
    }
}
