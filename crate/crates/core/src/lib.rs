//! Parser, code generator and completion engine for a small dataframe DSL.
//!
//! DSL statements live in host-language comments that start with a prefix
//! (`##` by default):
//!
//! ```text
//! ## x = on y : select_cols a, b, c : count
//! ```
//!
//! [`parse_line`] turns the statement into a [`DslLine`]; [`generate`] renders
//! it as pandas or PySpark code; [`complete`] offers grammar-driven
//! suggestions for a cursor position.

pub mod ast;
pub mod codegen;
pub mod completion;
pub mod error;
pub mod lexer;
pub mod parser;

pub use ast::{pretty_print, structural_eq, ChainOp, CondExpr, DslLine, Ident, Literal, Target};
pub use codegen::{
    generate, render_condition, render_schema, GenContext, GenResult, GenWarning, GENERATED_MARKER,
};
pub use completion::{complete, complete_with, CompletionItem, CompletionKind, CompletionOptions};
pub use error::{ErrorKind, Expected, ParseError};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{continuation, detect_dsl_line, parse_condition, parse_line, DslDetection};
