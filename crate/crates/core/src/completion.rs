//! Ranked completions for a cursor position in a DSL line.
//!
//! Suggestions come straight from the parser's expected set at the cursor.
//! When the text up to the cursor is already a complete statement, the
//! generated code is offered first as a preview.

use std::collections::BTreeSet;

use crate::ast::{AggFn, ColsOrRows, DslType, FileFormat};
use crate::codegen::{generate, GenContext};
use crate::error::Expected;
use crate::lexer::{lex, TokenKind};
use crate::parser::{continuation, detect_dsl_line, parse_line};

pub const DEFAULT_PREFIX: &str = "##";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompletionKind {
    Preview,
    Keyword,
    Identifier,
    /// Placeholder for a string or number literal.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionItem {
    pub label: String,
    pub detail: String,
    pub insert_text: String,
    /// 1 is the top suggestion.
    pub rank: u32,
    pub kind: CompletionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeywordDoc {
    pub keyword: &'static str,
    pub summary: &'static str,
    pub example: &'static str,
}

const fn doc(keyword: &'static str, summary: &'static str, example: &'static str) -> KeywordDoc {
    KeywordDoc {
        keyword,
        summary,
        example,
    }
}

static KEYWORD_DOCS: &[KeywordDoc] = &[
    doc(
        "load",
        "Read a file into a dataframe",
        "df = load as csv 'data.csv'",
    ),
    doc(
        "as",
        "File format of a load or save",
        "load as json 'data.json'",
    ),
    doc(
        "on",
        "Dataframe the operation chain applies to",
        "on df : show",
    ),
    doc(
        "save",
        "Write the dataframe to a file",
        "on df : save as csv to 'out.csv'",
    ),
    doc(
        "to",
        "Destination of save, or new name in rename_cols",
        "rename_cols a to b",
    ),
    doc(
        "select_cols",
        "Keep only the listed columns",
        "on df : select_cols a, b",
    ),
    doc(
        "select_rows",
        "Keep rows matching a condition",
        "on df : select_rows a > 0",
    ),
    doc(
        "drop_cols",
        "Remove the listed columns",
        "on df : drop_cols x, y",
    ),
    doc(
        "drop_rows",
        "Remove rows matching a condition",
        "on df : drop_rows a > 0",
    ),
    doc(
        "group_by",
        "Group rows by columns and aggregate",
        "on df : group_by a apply sum",
    ),
    doc(
        "apply",
        "Aggregation used after group_by",
        "group_by a apply mean",
    ),
    doc(
        "on_missing",
        "Handle missing values",
        "on df : on_missing fill_with 0",
    ),
    doc(
        "fill_with",
        "Replace missing values with a constant",
        "on_missing fill_with 0",
    ),
    doc(
        "replace",
        "Replace one value by another",
        "on df : replace 'n/a' by 0",
    ),
    doc("by", "Replacement value of replace", "replace old by new"),
    doc(
        "apply_fun",
        "Apply a function along columns or rows",
        "on df : apply_fun f on cols",
    ),
    doc(
        "append_col",
        "Add a column filled with nulls",
        "on df : append_col c",
    ),
    doc(
        "append_row",
        "Add a row with a default value (pandas only)",
        "on df : append_row c default 0",
    ),
    doc(
        "default",
        "Value of the appended row",
        "append_row c default 0",
    ),
    doc(
        "sort_by",
        "Sort rows ascending by a column",
        "on df : sort_by a",
    ),
    doc(
        "drop_duplicates",
        "Remove duplicate rows",
        "on df : drop_duplicates",
    ),
    doc(
        "rename_cols",
        "Rename columns",
        "on df : rename_cols a to b",
    ),
    doc("show", "Print the dataframe", "on df : show"),
    doc("describe", "Summary statistics", "on df : describe"),
    doc("return_top_N", "First N rows", "on df : return_top_N 10"),
    doc(
        "count",
        "Number of rows, or count aggregation",
        "on df : count",
    ),
    doc(
        "start_session",
        "Create a Spark session (spark only)",
        "start_session named 'app'",
    ),
    doc(
        "named",
        "Application name of the session",
        "start_session named 'app'",
    ),
    doc(
        "stop_session",
        "Stop the Spark session (spark only)",
        "stop_session",
    ),
    doc(
        "schema",
        "Define a Spark schema (spark only)",
        "s = schema a of int, b of str",
    ),
    doc("of", "Type of a schema field", "schema a of int"),
    doc(
        "with_schema",
        "Load using a schema (spark only)",
        "load 'p.txt' with_schema s",
    ),
    doc(
        "target_code",
        "Select the framework for generated code",
        "target_code = spark",
    ),
    doc("and", "Both conditions hold", "a > 0 and b < 3"),
    doc("or", "Either condition holds", "a == 1 or b == 2"),
    doc("in", "Value is one of a list", "a in [1, 2]"),
    doc("not", "Negated membership test", "a not in [1, 2]"),
    doc("csv", "Comma-separated file format", "load as csv 'a.csv'"),
    doc("json", "JSON file format", "load as json 'a.json'"),
    doc("sum", "Sum per group", "group_by a apply sum"),
    doc("min", "Minimum per group", "group_by a apply min"),
    doc("max", "Maximum per group", "group_by a apply max"),
    doc("mean", "Mean per group", "group_by a apply mean"),
    doc(
        "unique",
        "Distinct values per group",
        "group_by a apply unique",
    ),
    doc("int", "Integer column", "schema a of int"),
    doc("str", "String column", "schema a of str"),
    doc("float", "Floating-point column", "schema a of float"),
    doc("bool", "Boolean column", "schema a of bool"),
    doc(
        "cols",
        "Apply the function to each column",
        "apply_fun f on cols",
    ),
    doc(
        "rows",
        "Apply the function to each row",
        "apply_fun f on rows",
    ),
    doc("pandas", "Generate pandas code", "target_code = pandas"),
    doc("spark", "Generate PySpark code", "target_code = spark"),
];

/// Documentation of every grammar keyword and choice word.
pub fn keyword_docs() -> &'static [KeywordDoc] {
    KEYWORD_DOCS
}

pub fn keyword_doc(word: &str) -> Option<&'static KeywordDoc> {
    KEYWORD_DOCS.iter().find(|d| d.keyword == word)
}

fn punct_detail(punct: &str) -> &'static str {
    match punct {
        ":" => "Pipe into the next operation",
        "=" => "Assign the result",
        "," => "Next item",
        "[" => "Start a value list",
        "]" => "End the value list",
        _ => "Comparison",
    }
}

/// Words with a fixed meaning in some position; not offered as identifiers.
pub fn is_choice_word(word: &str) -> bool {
    AggFn::WORDS.contains(&word)
        || FileFormat::WORDS.contains(&word)
        || DslType::WORDS.contains(&word)
        || ColsOrRows::WORDS.contains(&word)
        || word == "pandas"
        || word == "spark"
}

pub struct CompletionOptions<'a> {
    pub prefix: &'a str,
    pub gen: &'a GenContext,
    /// Names seen in earlier DSL lines of the same document.
    pub identifiers: &'a BTreeSet<String>,
}

/// Completions at byte column `cursor_col` of `line_text`, using the default
/// `##` prefix and no known identifiers.
pub fn complete(line_text: &str, cursor_col: usize, ctx: &GenContext) -> Vec<CompletionItem> {
    let identifiers = BTreeSet::new();
    complete_with(
        line_text,
        cursor_col,
        &CompletionOptions {
            prefix: DEFAULT_PREFIX,
            gen: ctx,
            identifiers: &identifiers,
        },
    )
}

pub fn complete_with(
    line_text: &str,
    cursor_col: usize,
    opts: &CompletionOptions<'_>,
) -> Vec<CompletionItem> {
    let detection = detect_dsl_line(line_text, opts.prefix);
    if !detection.is_dsl
        || cursor_col < detection.payload_offset
        || cursor_col > line_text.len()
        || !line_text.is_char_boundary(cursor_col)
    {
        return Vec::new();
    }
    let text = &line_text[detection.payload_offset..cursor_col];
    let word_start = partial_word_start(text);
    let partial = &text[word_start..];

    let mut items = Vec::new();
    let full = continuation(text);
    if full.complete {
        if let Ok(line) = parse_line(text) {
            let generated = generate(&line, opts.gen);
            if !generated.code.is_empty() {
                items.push(CompletionItem {
                    label: format!("⇒ {}", generated.code),
                    detail: format!("Insert generated {} code", opts.gen.target),
                    insert_text: generated.code,
                    rank: 1,
                    kind: CompletionKind::Preview,
                });
            }
        }
    }

    let mut candidates: Vec<CompletionItem> = Vec::new();
    if partial.is_empty() {
        for expected in &full.expected {
            push_candidates(&mut candidates, *expected, "", opts.identifiers);
        }
    } else {
        for expected in &continuation(&text[..word_start]).expected {
            push_candidates(&mut candidates, *expected, partial, opts.identifiers);
        }
        // The word under the cursor may already be complete; offer what can
        // follow it without a space.
        for expected in &full.expected {
            if let Expected::Punct(_) = expected {
                push_candidates(&mut candidates, *expected, "", opts.identifiers);
            }
        }
    }

    candidates.sort_by(|a, b| a.label.cmp(&b.label).then(a.kind.cmp(&b.kind)));
    candidates.dedup_by(|a, b| a.label == b.label);
    let first_rank = items.len() as u32 + 1;
    for (i, mut item) in candidates.into_iter().enumerate() {
        item.rank = first_rank + i as u32;
        items.push(item);
    }
    items
}

fn push_candidates(
    out: &mut Vec<CompletionItem>,
    expected: Expected,
    partial: &str,
    identifiers: &BTreeSet<String>,
) {
    let item = |label: &str, detail: &str, insert: &str, kind| CompletionItem {
        label: label.to_string(),
        detail: detail.to_string(),
        insert_text: insert.to_string(),
        rank: 0,
        kind,
    };
    match expected {
        Expected::Keyword(word) if word.starts_with(partial) => {
            let detail = keyword_doc(word).map_or("", |d| d.summary);
            out.push(item(word, detail, word, CompletionKind::Keyword));
        }
        Expected::Punct(p) if p.starts_with(partial) => {
            out.push(item(p, punct_detail(p), p, CompletionKind::Keyword));
        }
        Expected::Identifier => {
            let identifier_like = partial
                .chars()
                .next()
                .is_none_or(|c| c.is_ascii_alphabetic() || c == '_');
            if identifier_like {
                out.push(item(
                    "<identifier>",
                    "A dataframe, column or variable name",
                    partial,
                    CompletionKind::Identifier,
                ));
            }
            for name in identifiers.iter().filter(|n| n.starts_with(partial)) {
                out.push(item(
                    name,
                    "Name used earlier",
                    name,
                    CompletionKind::Identifier,
                ));
            }
        }
        Expected::StringLiteral if partial.is_empty() => {
            out.push(item(
                "<string>",
                "A single-quoted string",
                "''",
                CompletionKind::Literal,
            ));
        }
        Expected::Number if partial.bytes().all(|b| b.is_ascii_digit()) => {
            out.push(item(
                "<number>",
                "A number",
                partial,
                CompletionKind::Literal,
            ));
        }
        _ => {}
    }
}

/// Start of the identifier-like word that ends `text`.
pub fn partial_word_start(text: &str) -> usize {
    text.char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_alphanumeric() || *c == '_')
        .last()
        .map_or(text.len(), |(i, _)| i)
}

/// Identifier tokens of the DSL lines in `lines`, minus choice words.
pub fn collect_identifiers<'a>(
    lines: impl IntoIterator<Item = &'a str>,
    prefix: &str,
) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    for line in lines {
        let detection = detect_dsl_line(line, prefix);
        if !detection.is_dsl {
            continue;
        }
        let (tokens, _) = lex(&line[detection.payload_offset..]);
        names.extend(
            tokens
                .into_iter()
                .filter(|t| t.kind == TokenKind::Ident && !is_choice_word(&t.text))
                .map(|t| t.text),
        );
    }
    names
}
