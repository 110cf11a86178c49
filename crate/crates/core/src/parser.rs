//! Recursive-descent parser for one DSL statement.
//!
//! The grammar is LL(1). Every time the parser tests the current token it
//! records what it was looking for; the set collected at the failure position
//! is reported in [`ParseError::expected`] and doubles as the completion
//! source.
//!
//! ```text
//! statement  := IDENT '=' assignable | assignable
//!             | 'start_session' 'named' STRING | 'stop_session'
//!             | 'target_code' '=' ('pandas' | 'spark')
//! assignable := load | 'on' IDENT ':' chain | 'schema' field (',' field)*
//! load       := 'load' ['as' format] path ['with_schema' IDENT]
//! chain      := op (':' op)*          -- show/describe/count end the chain
//! cond       := conj ('or' conj)*
//! conj       := atom ('and' atom)*
//! atom       := IDENT cmp scalar | IDENT ['not'] 'in' '[' scalar (',' scalar)* ']'
//! ```

use std::collections::{BTreeSet, HashSet};

use crate::ast::{
    AggFn, ChainOp, CmpOp, ColsOrRows, CondExpr, DslLine, DslType, FileFormat, Ident, Literal,
    Target,
};
use crate::error::{ErrorKind, Expected, ParseError};
use crate::lexer::{lex, LexError, Token, TokenKind};

/// Keywords that can start an operation after `on <df> :`.
pub const CHAIN_KEYWORDS: &[&str] = &[
    "select_cols",
    "select_rows",
    "drop_cols",
    "drop_rows",
    "group_by",
    "on_missing",
    "replace",
    "apply_fun",
    "append_col",
    "append_row",
    "sort_by",
    "drop_duplicates",
    "rename_cols",
    "show",
    "describe",
    "return_top_N",
    "count",
    "save",
];

/// Whether a source line carries a DSL statement, and where it starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DslDetection {
    pub is_dsl: bool,
    /// Byte column of the statement text; 0 when `is_dsl` is false.
    pub payload_offset: usize,
}

/// A line is DSL when, after leading whitespace, it starts with `prefix`.
/// The payload begins after the prefix and one optional space.
pub fn detect_dsl_line(line_text: &str, prefix: &str) -> DslDetection {
    let trimmed = line_text.trim_start_matches([' ', '\t']);
    let indent = line_text.len() - trimmed.len();
    match trimmed.strip_prefix(prefix) {
        Some(rest) if !prefix.is_empty() => {
            let space = usize::from(rest.starts_with(' '));
            DslDetection {
                is_dsl: true,
                payload_offset: indent + prefix.len() + space,
            }
        }
        _ => DslDetection {
            is_dsl: false,
            payload_offset: 0,
        },
    }
}

/// Parses one statement (the text after the DSL prefix).
pub fn parse_line(payload: &str) -> Result<DslLine, ParseError> {
    Parser::new(payload).statement()
}

/// Parses a complete condition from `tokens`.
pub fn parse_condition(tokens: &[Token]) -> Result<CondExpr, ParseError> {
    let end = tokens.last().map_or(0, Token::end);
    let mut parser = Parser::from_tokens(tokens.to_vec(), end, None);
    let cond = parser.condition()?;
    parser.expect_eol()?;
    Ok(cond)
}

/// Outcome of parsing a prefix of a statement, for completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Continuation {
    /// The whole text is a valid statement.
    pub complete: bool,
    /// Tokens that may follow the text. Empty when parsing failed before the
    /// end of the text.
    pub expected: BTreeSet<Expected>,
}

/// Parses `payload` and reports what may come after it.
pub fn continuation(payload: &str) -> Continuation {
    let mut parser = Parser::new(payload);
    match parser.statement() {
        Ok(_) => Continuation {
            complete: true,
            expected: parser.expected,
        },
        Err(err) if err.position >= payload.trim_end().len() && at_end(&err) => Continuation {
            complete: false,
            expected: err.expected,
        },
        Err(_) => Continuation {
            complete: false,
            expected: BTreeSet::new(),
        },
    }
}

fn at_end(err: &ParseError) -> bool {
    err.kind == ErrorKind::Syntax && err.found.is_empty()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    expected: BTreeSet<Expected>,
    /// Set when lexing stopped early; the final token then matches nothing.
    lex_error: Option<LexError>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(payload: &str) -> Parser {
        let (tokens, lex_error) = lex(payload);
        let end = lex_error.as_ref().map_or(payload.len(), |e| e.position);
        Parser::from_tokens(tokens, end, lex_error)
    }

    fn from_tokens(mut tokens: Vec<Token>, end: usize, lex_error: Option<LexError>) -> Parser {
        tokens.push(Token {
            kind: TokenKind::Eol,
            text: String::new(),
            span: (end, end),
        });
        Parser {
            tokens,
            pos: 0,
            expected: BTreeSet::new(),
            lex_error,
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn at_final(&self) -> bool {
        self.pos + 1 == self.tokens.len()
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if !self.at_final() {
            self.pos += 1;
        }
        self.expected.clear();
        token
    }

    fn error(&self) -> ParseError {
        let token = self.peek();
        if self.at_final() {
            if let Some(lex) = &self.lex_error {
                let expected = match lex.kind {
                    ErrorKind::UnterminatedString => [Expected::ClosingQuote].into(),
                    _ => self.expected.clone(),
                };
                return ParseError {
                    position: lex.position,
                    found: lex.found.clone(),
                    expected,
                    kind: lex.kind.clone(),
                };
            }
        }
        ParseError {
            position: token.start(),
            found: token.text.clone(),
            expected: self.expected.clone(),
            kind: ErrorKind::Syntax,
        }
    }

    fn semantic_error(&self, token: &Token, expected: Expected, kind: ErrorKind) -> ParseError {
        ParseError {
            position: token.start(),
            found: token.text.clone(),
            expected: [expected].into(),
            kind,
        }
    }

    /// Tests for a keyword or choice word without consuming it.
    fn check_word(&mut self, word: &'static str) -> bool {
        self.expected.insert(Expected::Keyword(word));
        let token = self.peek();
        matches!(token.kind, TokenKind::Keyword | TokenKind::Ident) && token.text == word
    }

    fn eat_word(&mut self, word: &'static str) -> bool {
        let hit = self.check_word(word);
        if hit {
            self.advance();
        }
        hit
    }

    fn expect_word(&mut self, word: &'static str) -> PResult<()> {
        if self.eat_word(word) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn check_punct(&mut self, punct: &'static str) -> bool {
        self.expected.insert(Expected::Punct(punct));
        let token = self.peek();
        token.kind == TokenKind::Punct && token.text == punct
    }

    fn eat_punct(&mut self, punct: &'static str) -> bool {
        let hit = self.check_punct(punct);
        if hit {
            self.advance();
        }
        hit
    }

    fn expect_punct(&mut self, punct: &'static str) -> PResult<()> {
        if self.eat_punct(punct) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn check_ident(&mut self) -> bool {
        self.expected.insert(Expected::Identifier);
        self.peek().kind == TokenKind::Ident
    }

    fn expect_ident(&mut self) -> PResult<Ident> {
        if self.check_ident() {
            let token = self.advance();
            Ok(Ident::new(token.text).expect("lexer yields valid identifiers"))
        } else {
            Err(self.error())
        }
    }

    fn check_string(&mut self) -> bool {
        self.expected.insert(Expected::StringLiteral);
        self.peek().kind == TokenKind::Str
    }

    fn check_number(&mut self) -> bool {
        self.expected.insert(Expected::Number);
        self.peek().kind == TokenKind::Number
    }

    fn expect_eol(&mut self) -> PResult<()> {
        self.expected.insert(Expected::EndOfLine);
        if self.peek().kind == TokenKind::Eol && self.lex_error.is_none() {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn expect_choice<T: Copy>(
        &mut self,
        words: &'static [&'static str],
        from: impl Fn(&str) -> Option<T>,
    ) -> PResult<T> {
        for word in words {
            if self.check_word(word) {
                self.advance();
                return Ok(from(word).expect("choice table is consistent"));
            }
        }
        Err(self.error())
    }

    fn statement(&mut self) -> PResult<DslLine> {
        if self.check_ident() {
            let name = self.expect_ident()?;
            self.expect_punct("=")?;
            let mut line = self.assignable()?;
            line.assignment = Some(name);
            self.expect_eol()?;
            return Ok(line);
        }
        let line = if self.eat_word("start_session") {
            self.expect_word("named")?;
            if !self.check_string() {
                return Err(self.error());
            }
            let name = self.advance().string_value();
            standalone(ChainOp::StartSession { name })
        } else if self.eat_word("stop_session") {
            standalone(ChainOp::StopSession)
        } else if self.eat_word("target_code") {
            self.expect_punct("=")?;
            let target = self.expect_choice(&["pandas", "spark"], Target::from_keyword)?;
            standalone(ChainOp::TargetOption { target })
        } else {
            self.assignable()?
        };
        self.expect_eol()?;
        Ok(line)
    }

    fn assignable(&mut self) -> PResult<DslLine> {
        if self.eat_word("load") {
            return self.load();
        }
        if self.eat_word("schema") {
            let mut fields = Vec::new();
            loop {
                let name = self.expect_ident()?;
                self.expect_word("of")?;
                let ty = self.expect_choice(DslType::WORDS, DslType::from_keyword)?;
                fields.push((name, ty));
                if !self.eat_punct(",") {
                    break;
                }
            }
            return Ok(standalone(ChainOp::SchemaDef { fields }));
        }
        if self.eat_word("on") {
            let source = self.expect_ident()?;
            self.expect_punct(":")?;
            let mut chain = Vec::new();
            loop {
                let op = self.chain_op()?;
                let terminal = op.is_terminal();
                chain.push(op);
                if terminal || !self.eat_punct(":") {
                    break;
                }
            }
            return Ok(DslLine {
                assignment: None,
                source: Some(source),
                chain,
            });
        }
        Err(self.error())
    }

    fn load(&mut self) -> PResult<DslLine> {
        let format = if self.eat_word("as") {
            Some(self.expect_choice(FileFormat::WORDS, FileFormat::from_keyword)?)
        } else {
            None
        };
        let path = self.path()?;
        let schema = if self.eat_word("with_schema") {
            Some(self.expect_ident()?)
        } else {
            None
        };
        Ok(standalone(ChainOp::Load {
            format,
            path,
            schema,
        }))
    }

    fn path(&mut self) -> PResult<Literal> {
        let is_string = self.check_string();
        let is_ident = self.check_ident();
        if is_string {
            Ok(Literal::Str(self.advance().string_value()))
        } else if is_ident {
            Ok(Literal::Ident(self.advance().text))
        } else {
            Err(self.error())
        }
    }

    fn chain_op(&mut self) -> PResult<ChainOp> {
        // Record the full alternative set before dispatching.
        let word = CHAIN_KEYWORDS.iter().copied().fold(None, |hit, kw| {
            if self.check_word(kw) {
                Some(kw)
            } else {
                hit
            }
        });
        let Some(word) = word else {
            return Err(self.error());
        };
        self.advance();
        let op = match word {
            "select_cols" => ChainOp::SelectCols {
                cols: self.ident_list()?,
            },
            "drop_cols" => ChainOp::DropCols {
                cols: self.ident_list()?,
            },
            "select_rows" => ChainOp::SelectRows {
                cond: self.condition()?,
            },
            "drop_rows" => ChainOp::DropRows {
                cond: self.condition()?,
            },
            "group_by" => {
                let cols = self.ident_list()?;
                self.expect_word("apply")?;
                let agg = self.expect_choice(AggFn::WORDS, AggFn::from_keyword)?;
                ChainOp::GroupBy { cols, agg }
            }
            "on_missing" => {
                if self.eat_word("fill_with") {
                    ChainOp::OnMissingFill {
                        value: self.value()?,
                    }
                } else if self.eat_word("drop_rows") {
                    ChainOp::OnMissingDropRows
                } else {
                    return Err(self.error());
                }
            }
            "replace" => {
                let old = self.value()?;
                self.expect_word("by")?;
                let new = self.value()?;
                ChainOp::Replace { old, new }
            }
            "apply_fun" => {
                let func = self.expect_ident()?;
                self.expect_word("on")?;
                let axis = self.expect_choice(ColsOrRows::WORDS, ColsOrRows::from_keyword)?;
                ChainOp::ApplyFun { func, axis }
            }
            "append_col" => ChainOp::AppendCol {
                name: self.expect_ident()?,
            },
            "append_row" => {
                let name = self.expect_ident()?;
                self.expect_word("default")?;
                let default = self.value()?;
                ChainOp::AppendRow { name, default }
            }
            "sort_by" => ChainOp::SortBy {
                col: self.expect_ident()?,
            },
            "drop_duplicates" => ChainOp::DropDuplicates,
            "rename_cols" => self.rename_cols()?,
            "show" => ChainOp::Show,
            "describe" => ChainOp::Describe,
            "count" => ChainOp::Count,
            "return_top_N" => {
                if !self.check_number() {
                    return Err(self.error());
                }
                let token = self.advance();
                match token.text.parse::<u64>() {
                    Ok(n) if n >= 1 && !token.text.starts_with('+') => ChainOp::ReturnTopN { n },
                    _ => {
                        return Err(self.semantic_error(
                            &token,
                            Expected::Number,
                            ErrorKind::InvalidTopN,
                        ))
                    }
                }
            }
            "save" => {
                self.expect_word("as")?;
                let format = self.expect_choice(FileFormat::WORDS, FileFormat::from_keyword)?;
                self.expect_word("to")?;
                let path = self.path()?;
                ChainOp::Save { format, path }
            }
            _ => unreachable!("every chain keyword is handled"),
        };
        Ok(op)
    }

    fn rename_cols(&mut self) -> PResult<ChainOp> {
        let mut pairs = Vec::new();
        let mut seen = HashSet::new();
        loop {
            let token = self.peek().clone();
            let from = self.expect_ident()?;
            if !seen.insert(from.clone()) {
                return Err(self.semantic_error(
                    &token,
                    Expected::Identifier,
                    ErrorKind::DuplicateRenameSource(from.to_string()),
                ));
            }
            self.expect_word("to")?;
            let to = self.expect_ident()?;
            pairs.push((from, to));
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(ChainOp::RenameCols { pairs })
    }

    fn ident_list(&mut self) -> PResult<Vec<Ident>> {
        let mut items = vec![self.expect_ident()?];
        while self.eat_punct(",") {
            items.push(self.expect_ident()?);
        }
        Ok(items)
    }

    fn scalar(&mut self) -> PResult<Literal> {
        let is_ident = self.check_ident();
        let is_string = self.check_string();
        let is_number = self.check_number();
        if is_ident {
            Ok(Literal::Ident(self.advance().text))
        } else if is_string {
            Ok(Literal::Str(self.advance().string_value()))
        } else if is_number {
            Ok(Literal::Num(self.advance().text))
        } else {
            Err(self.error())
        }
    }

    fn scalar_list(&mut self) -> PResult<Vec<Literal>> {
        self.expect_punct("[")?;
        let mut items = vec![self.scalar()?];
        while self.eat_punct(",") {
            items.push(self.scalar()?);
        }
        self.expect_punct("]")?;
        Ok(items)
    }

    /// A scalar or a bracketed list of scalars.
    fn value(&mut self) -> PResult<Literal> {
        if self.check_punct("[") {
            return Ok(Literal::List(self.scalar_list()?));
        }
        self.scalar()
    }

    fn condition(&mut self) -> PResult<CondExpr> {
        let mut lhs = self.conjunction()?;
        while self.eat_word("or") {
            let rhs = self.conjunction()?;
            lhs = CondExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<CondExpr> {
        let mut lhs = self.atom()?;
        while self.eat_word("and") {
            let rhs = self.atom()?;
            lhs = CondExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> PResult<CondExpr> {
        let col = self.expect_ident()?;
        for op in CmpOp::ALL {
            if self.check_punct(op.symbol()) {
                self.advance();
                let rhs = self.scalar()?;
                return Ok(CondExpr::Cmp { col, op: *op, rhs });
            }
        }
        let negated = self.eat_word("not");
        if !negated && !self.check_word("in") {
            return Err(self.error());
        }
        self.expect_word("in")?;
        let values = self.scalar_list()?;
        Ok(CondExpr::Member {
            col,
            negated,
            values,
        })
    }
}

fn standalone(op: ChainOp) -> DslLine {
    DslLine {
        assignment: None,
        source: None,
        chain: vec![op],
    }
}
