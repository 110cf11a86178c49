#![allow(dead_code)]

use tabledsl::{Expected, Token, TokenKind};

pub fn fixtures() -> Vec<String> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/statements.txt");
    std::fs::read_to_string(path)
        .expect("fixture file")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Whether `token` is one of the things described by `expected`.
pub fn token_matches(token: &Token, expected: &Expected) -> bool {
    match expected {
        Expected::Keyword(word) => {
            matches!(token.kind, TokenKind::Keyword | TokenKind::Ident) && token.text == *word
        }
        Expected::Punct(p) => token.kind == TokenKind::Punct && token.text == *p,
        Expected::Identifier => token.kind == TokenKind::Ident,
        Expected::StringLiteral => token.kind == TokenKind::Str,
        Expected::Number => token.kind == TokenKind::Number,
        Expected::ClosingQuote | Expected::EndOfLine => false,
    }
}
