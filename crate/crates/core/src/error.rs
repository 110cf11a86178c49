use std::collections::BTreeSet;
use std::fmt;

/// Something the parser would have accepted at the error position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expected {
    /// A reserved keyword or a contextual choice word such as `csv` or `sum`.
    Keyword(&'static str),
    Punct(&'static str),
    Identifier,
    StringLiteral,
    Number,
    ClosingQuote,
    EndOfLine,
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Keyword(word) => f.write_str(word),
            Expected::Punct(p) => write!(f, "'{p}'"),
            Expected::Identifier => f.write_str("identifier"),
            Expected::StringLiteral => f.write_str("string literal"),
            Expected::Number => f.write_str("number"),
            Expected::ClosingQuote => f.write_str("closing quote"),
            Expected::EndOfLine => f.write_str("end of line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorKind {
    /// The token at `position` cannot continue the statement.
    Syntax,
    UnterminatedString,
    IllegalCharacter(char),
    DuplicateRenameSource(String),
    InvalidTopN,
}

/// A failed parse. `position` is a byte column into the parsed text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub found: String,
    pub expected: BTreeSet<Expected>,
    pub kind: ErrorKind,
}

impl ParseError {
    /// Renders the expected set as `{a, b, c}`.
    pub fn expected_list(&self) -> String {
        let items: Vec<String> = self.expected.iter().map(|e| e.to_string()).collect();
        format!("{{{}}}", items.join(", "))
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ErrorKind::DuplicateRenameSource(name) => {
                write!(f, "column `{name}` is renamed twice")
            }
            ErrorKind::InvalidTopN => {
                write!(
                    f,
                    "return_top_N needs a positive integer, found `{}`",
                    self.found
                )
            }
            ErrorKind::UnterminatedString => f.write_str("unterminated string literal"),
            ErrorKind::IllegalCharacter(c) => write!(f, "illegal character {c:?}"),
            ErrorKind::Syntax => {
                let found = if self.found.is_empty() {
                    "end of line".to_string()
                } else {
                    format!("`{}`", self.found)
                };
                write!(f, "expected {}, found {found}", self.expected_list())
            }
        }
    }
}

impl std::error::Error for ParseError {}
