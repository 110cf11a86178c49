use std::collections::BTreeSet;

use tabledsl::completion::collect_identifiers;
use tabledsl::{
    complete_with, CompletionItem, CompletionKind, CompletionOptions, GenContext, Target,
};
use tabledsl_lsp::{target_state, DocumentStore, HubConfig};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CompleteError {
    #[error("line {line} is past the end of the file ({count} lines)")]
    LineOutOfRange { line: usize, count: usize },
}

/// Suggestions at 0-based `line` and byte `col`, with the same target and
/// identifier context the language server would use.
pub fn complete_at(
    source: &str,
    line: usize,
    col: usize,
    target: Target,
    prefix: &str,
) -> Result<Vec<CompletionItem>, CompleteError> {
    let lines: Vec<&str> = source
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    let text = *lines.get(line).ok_or(CompleteError::LineOutOfRange {
        line,
        count: lines.len(),
    })?;
    let config = HubConfig {
        dsl_prefix: prefix.to_string(),
        default_target: target,
        downstream_cmd: None,
    };
    let mut store = DocumentStore::new();
    store.open("file", 0, source);
    let gen = GenContext::new(target_state(&store, "file", line, &config));
    let identifiers: BTreeSet<String> = collect_identifiers(lines[..line].iter().copied(), prefix);
    let mut col = col.min(text.len());
    while !text.is_char_boundary(col) {
        col -= 1;
    }
    Ok(complete_with(
        text,
        col,
        &CompletionOptions {
            prefix,
            gen: &gen,
            identifiers: &identifiers,
        },
    ))
}

pub fn kind_name(kind: CompletionKind) -> &'static str {
    match kind {
        CompletionKind::Preview => "preview",
        CompletionKind::Keyword => "keyword",
        CompletionKind::Identifier => "identifier",
        CompletionKind::Literal => "literal",
    }
}

/// `rank<TAB>kind<TAB>label`, one item per line.
pub fn format_items(items: &[CompletionItem]) -> String {
    items
        .iter()
        .map(|i| format!("{}\t{}\t{}\n", i.rank, kind_name(i.kind), i.label))
        .collect()
}
