//! The request loop.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde_json::{json, Value};
use tabledsl::completion::{collect_identifiers, partial_word_start};
use tabledsl::{
    complete_with, detect_dsl_line, parse_line, CompletionItem, CompletionKind, CompletionOptions,
    GenContext, GENERATED_MARKER,
};

use crate::config::HubConfig;
use crate::dispatch::{
    dispatch, target_state, text_position, Route, RpcError, INVALID_PARAMS, METHOD_NOT_FOUND,
    PARSE_ERROR,
};
use crate::downstream::{Downstream, SharedWriter};
use crate::store::{byte_to_utf16, utf16_to_byte, Change, DocumentStore, Position, Range};
use crate::transport::{read_message, write_message};

pub const TRIGGER_CHARACTERS: [&str; 2] = [" ", ":"];

/// Runs the hub until `exit` or end of input. Returns the process exit code:
/// 0 when `shutdown` came before the end, 1 otherwise.
pub fn serve(config: HubConfig, mut input: impl BufRead, output: SharedWriter) -> i32 {
    let mut hub = Hub::new(config, output);
    loop {
        match read_message(&mut input) {
            Ok(Some(body)) => {
                if hub.handle(&body) == Flow::Exit {
                    break;
                }
            }
            Ok(None) => {
                if !hub.shutdown_requested {
                    log::warn!("client closed the stream without shutdown");
                }
                break;
            }
            Err(err) => {
                log::error!("protocol framing error: {err}");
                hub.stop_downstream();
                return 1;
            }
        }
    }
    hub.stop_downstream();
    if hub.shutdown_requested {
        0
    } else {
        1
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Flow {
    Continue,
    Exit,
}

struct Hub {
    config: HubConfig,
    store: DocumentStore,
    out: SharedWriter,
    downstream: Option<Downstream>,
    /// Set once the child failed to start or died; it is not restarted.
    downstream_disabled: bool,
    init_params: Value,
    shutdown_requested: bool,
}

impl Hub {
    fn new(config: HubConfig, out: SharedWriter) -> Hub {
        Hub {
            config,
            store: DocumentStore::new(),
            out,
            downstream: None,
            downstream_disabled: false,
            init_params: json!({"processId": null, "rootUri": null, "capabilities": {}}),
            shutdown_requested: false,
        }
    }

    fn handle(&mut self, body: &[u8]) -> Flow {
        let msg: Value = match serde_json::from_slice(body) {
            Ok(msg) => msg,
            Err(err) => {
                log::warn!("unparsable message: {err}");
                self.reply_error(&Value::Null, PARSE_ERROR, &err.to_string());
                return Flow::Continue;
            }
        };
        self.reap_downstream();
        let id = msg.get("id").cloned();
        let method = msg.get("method").and_then(Value::as_str).unwrap_or("");
        let params = msg.get("params").cloned().unwrap_or(Value::Null);
        match method {
            "initialize" => {
                if !params.is_null() {
                    self.init_params = params;
                }
                self.reply(&id.unwrap_or(Value::Null), capabilities());
                return Flow::Continue;
            }
            "initialized" => return Flow::Continue,
            "shutdown" => {
                self.shutdown_requested = true;
                self.reply(&id.unwrap_or(Value::Null), Value::Null);
                return Flow::Continue;
            }
            "exit" => return Flow::Exit,
            _ => {}
        }
        let route = match dispatch(&msg, &self.store, &self.config) {
            Ok(route) => route,
            Err(RpcError { code, message }) => {
                match &id {
                    Some(id) => self.reply_error(id, code, &message),
                    None => log::warn!("{method}: {message}"),
                }
                return Flow::Continue;
            }
        };
        match route {
            Route::Both => {
                self.sync(method, &params);
                if let Some(downstream) = self.downstream.as_mut() {
                    if let Err(err) = downstream.forward(body) {
                        log::warn!("cannot forward {method}: {err}");
                    }
                }
            }
            Route::LocalDsl => {
                let id = id.unwrap_or(Value::Null);
                match self.completion(&params) {
                    Ok(result) => self.reply(&id, result),
                    Err(err) => self.reply_error(&id, err.code, &err.message),
                }
            }
            Route::Downstream => {
                if !self.forward_to_downstream(id.as_ref(), method, body) {
                    self.unhandled(id.as_ref(), method);
                }
            }
            Route::Unhandled => self.unhandled(id.as_ref(), method),
        }
        Flow::Continue
    }

    fn unhandled(&mut self, id: Option<&Value>, method: &str) {
        let Some(id) = id else { return };
        if method.is_empty() {
            // A stray response with nowhere to go.
            return;
        }
        if method == "textDocument/completion" {
            self.reply(id, json!([]));
        } else {
            self.reply_error(id, METHOD_NOT_FOUND, &format!("method not found: {method}"));
        }
    }

    /// Sends `body` to the downstream server, starting it on first use for a
    /// request. Returns false when there is no usable downstream.
    fn forward_to_downstream(&mut self, id: Option<&Value>, method: &str, body: &[u8]) -> bool {
        let is_request = id.is_some() && !method.is_empty();
        if self.downstream.is_none() && is_request {
            self.start_downstream();
        }
        let Some(downstream) = self.downstream.as_mut() else {
            return false;
        };
        let sent = match id {
            Some(id) if is_request => downstream.forward_request(id, body),
            _ => downstream.forward(body),
        };
        match sent {
            Ok(()) => true,
            Err(err) => {
                log::warn!("downstream unavailable, continuing without it: {err}");
                self.drop_downstream();
                false
            }
        }
    }

    fn start_downstream(&mut self) {
        if self.downstream_disabled {
            return;
        }
        let Some(argv) = self.config.downstream_cmd.clone() else {
            return;
        };
        let mut downstream = match Downstream::spawn(&argv, self.out.clone(), &self.init_params) {
            Ok(downstream) => downstream,
            Err(err) => {
                log::warn!("cannot start downstream {:?}: {err}", argv.join(" "));
                self.downstream_disabled = true;
                return;
            }
        };
        // Bring the child's view of open documents up to date.
        for (uri, doc) in self.store.iter() {
            let open = json!({
                "jsonrpc": "2.0", "method": "textDocument/didOpen",
                "params": {"textDocument": {
                    "uri": uri, "languageId": "python", "version": doc.version, "text": doc.text(),
                }},
            });
            if downstream.send(&open).is_err() {
                break;
            }
        }
        log::info!("started downstream {:?}", argv.join(" "));
        self.downstream = Some(downstream);
    }

    fn reap_downstream(&mut self) {
        if self.downstream.as_ref().is_some_and(|d| !d.is_alive()) {
            log::warn!("downstream server exited; continuing without it");
            self.drop_downstream();
        }
    }

    fn drop_downstream(&mut self) {
        self.downstream_disabled = true;
        if let Some(downstream) = self.downstream.take() {
            downstream.shutdown();
        }
    }

    fn stop_downstream(&mut self) {
        if let Some(downstream) = self.downstream.take() {
            downstream.shutdown();
        }
    }

    /// Applies a document-sync notification and republishes diagnostics.
    fn sync(&mut self, method: &str, params: &Value) {
        let doc = &params["textDocument"];
        let Some(uri) = doc["uri"].as_str() else {
            log::warn!("{method} without a document uri");
            return;
        };
        match method {
            "textDocument/didOpen" => {
                let text = doc["text"].as_str().unwrap_or("");
                self.store
                    .open(uri, doc["version"].as_i64().unwrap_or(0), text);
            }
            "textDocument/didChange" => {
                let version = doc["version"].as_i64().unwrap_or(i64::MAX);
                let changes: Vec<Change> = params["contentChanges"]
                    .as_array()
                    .map(|a| a.iter().filter_map(parse_change).collect())
                    .unwrap_or_default();
                if let Err(err) = self.store.change(uri, version, &changes) {
                    log::warn!("ignoring change: {err}");
                    return;
                }
            }
            "textDocument/didClose" => {
                self.store.close(uri);
                self.notify(
                    "textDocument/publishDiagnostics",
                    json!({"uri": uri, "diagnostics": []}),
                );
                return;
            }
            _ => return,
        }
        let diagnostics =
            catch_unwind(AssertUnwindSafe(|| self.diagnostics(uri))).unwrap_or_else(|_| {
                log::error!("diagnostics panicked for {uri}");
                Vec::new()
            });
        let version = self.store.get(uri).map(|d| d.version);
        self.notify(
            "textDocument/publishDiagnostics",
            json!({"uri": uri, "version": version, "diagnostics": diagnostics}),
        );
    }

    fn diagnostics(&self, uri: &str) -> Vec<Value> {
        let Some(doc) = self.store.get(uri) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (line_no, line) in doc.lines.iter().enumerate() {
            let detection = detect_dsl_line(line, &self.config.dsl_prefix);
            if !detection.is_dsl {
                continue;
            }
            let Err(err) = parse_line(&line[detection.payload_offset..]) else {
                continue;
            };
            let start = (detection.payload_offset + err.position).min(line.len());
            let mut end = (start + err.found.len().max(1)).min(line.len());
            while !line.is_char_boundary(end) {
                end += 1;
            }
            out.push(json!({
                "range": range_json(line_no, byte_to_utf16(line, start), line_no, byte_to_utf16(line, end)),
                "severity": 1,
                "source": "tabledsl",
                "message": err.to_string(),
            }));
        }
        out
    }

    fn completion(&self, params: &Value) -> Result<Value, RpcError> {
        let (uri, line_no, character) = text_position(params)?;
        let doc = self
            .store
            .get(uri)
            .ok_or_else(|| RpcError::invalid_params(format!("document {uri} is not open")))?;
        let line = doc.lines.get(line_no).ok_or_else(|| RpcError {
            code: INVALID_PARAMS,
            message: format!("line {line_no} out of range"),
        })?;
        let cursor = utf16_to_byte(line, character);
        let target = target_state(&self.store, uri, line_no, &self.config);
        let items = catch_unwind(AssertUnwindSafe(|| {
            let gen = GenContext::new(target);
            let identifiers: BTreeSet<String> = collect_identifiers(
                doc.lines[..line_no].iter().map(String::as_str),
                &self.config.dsl_prefix,
            );
            let opts = CompletionOptions {
                prefix: &self.config.dsl_prefix,
                gen: &gen,
                identifiers: &identifiers,
            };
            complete_with(line, cursor, &opts)
        }))
        .unwrap_or_else(|_| {
            log::error!("completion panicked on {uri}:{line_no}");
            Vec::new()
        });
        let payload = detect_dsl_line(line, &self.config.dsl_prefix).payload_offset;
        let word_start = if cursor >= payload {
            payload + partial_word_start(&line[payload..cursor])
        } else {
            cursor
        };
        let next_line = doc.lines.get(line_no + 1).map(String::as_str);
        let items: Vec<Value> = items
            .iter()
            .map(|item| completion_item(item, line_no, line, next_line, word_start, cursor))
            .collect();
        Ok(json!({"isIncomplete": true, "items": items}))
    }

    fn reply(&self, id: &Value, result: Value) {
        self.write(&json!({"jsonrpc": "2.0", "id": id, "result": result}));
    }

    fn reply_error(&self, id: &Value, code: i64, message: &str) {
        self.write(
            &json!({"jsonrpc": "2.0", "id": id, "error": {"code": code, "message": message}}),
        );
    }

    fn notify(&self, method: &str, params: Value) {
        self.write(&json!({"jsonrpc": "2.0", "method": method, "params": params}));
    }

    fn write(&self, msg: &Value) {
        let body = serde_json::to_vec(msg).expect("json values serialize");
        if let Err(err) = write_message(&mut *self.out.lock().unwrap(), &body) {
            log::error!("cannot write to client: {err}");
        }
    }
}

fn capabilities() -> Value {
    json!({
        "capabilities": {
            "textDocumentSync": {"openClose": true, "change": 2},
            "completionProvider": {
                "triggerCharacters": TRIGGER_CHARACTERS,
                "resolveProvider": false,
            },
        },
        "serverInfo": {"name": "tabledsl", "version": env!("CARGO_PKG_VERSION")},
    })
}

fn parse_change(change: &Value) -> Option<Change> {
    let text = change["text"].as_str()?.to_string();
    if change.get("range").is_none() {
        return Some(Change::Full(text));
    }
    let pos = |p: &Value| {
        Some(Position {
            line: p["line"].as_u64()? as usize,
            character: p["character"].as_u64()? as usize,
        })
    };
    let range = Range {
        start: pos(&change["range"]["start"])?,
        end: pos(&change["range"]["end"])?,
    };
    Some(Change::Incremental { range, text })
}

fn range_json(l0: usize, c0: usize, l1: usize, c1: usize) -> Value {
    json!({"start": {"line": l0, "character": c0}, "end": {"line": l1, "character": c1}})
}

/// LSP rendering of one suggestion. Words replace the partial word before
/// the cursor and punctuation is inserted at the cursor. The preview keeps
/// the line as is and writes the code, marked as generated, on the line
/// below, replacing an earlier generated line if there is one.
fn completion_item(
    item: &CompletionItem,
    line_no: usize,
    line: &str,
    next_line: Option<&str>,
    word_start: usize,
    cursor: usize,
) -> Value {
    let cursor16 = byte_to_utf16(line, cursor);
    let word16 = byte_to_utf16(line, word_start);
    let partial = &line[word_start..cursor];
    let (kind, edit_start) = match item.kind {
        CompletionKind::Preview => (15, cursor16),
        CompletionKind::Keyword => (14, word16),
        CompletionKind::Identifier => (6, word16),
        CompletionKind::Literal => (12, word16),
    };
    let is_punct = !item
        .label
        .starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_' || c == '<');
    let edit_start = if is_punct { cursor16 } else { edit_start };
    let mut value = json!({
        "label": item.label,
        "kind": kind,
        "detail": item.detail,
        "sortText": format!("{:04}", item.rank),
        "insertTextFormat": 1,
    });
    if item.kind == CompletionKind::Preview {
        let indent: String = line.chars().take_while(|c| c.is_whitespace()).collect();
        let generated = format!("{indent}{}  {GENERATED_MARKER}", item.insert_text);
        let end16 = byte_to_utf16(line, line.len());
        value["filterText"] = json!(partial);
        value["preselect"] = json!(true);
        match next_line {
            Some(next) if next.trim_end().ends_with(GENERATED_MARKER) => {
                let next_end = byte_to_utf16(next, next.len());
                value["textEdit"] = json!({
                    "range": range_json(line_no, cursor16, line_no, cursor16),
                    "newText": "",
                });
                value["additionalTextEdits"] = json!([{
                    "range": range_json(line_no + 1, 0, line_no + 1, next_end),
                    "newText": generated,
                }]);
            }
            // Edits may not overlap, so the new line rides on the main edit,
            // which rewrites the rest of the current line unchanged.
            _ => {
                value["textEdit"] = json!({
                    "range": range_json(line_no, cursor16, line_no, end16),
                    "newText": format!("{}\n{generated}", &line[cursor..]),
                });
            }
        }
    } else {
        let filter = if item.insert_text.is_empty() {
            &item.label
        } else {
            &item.insert_text
        };
        value["filterText"] = json!(if is_punct {
            format!("{partial}{filter}")
        } else {
            filter.clone()
        });
        value["textEdit"] = json!({
            "range": range_json(line_no, edit_start, line_no, cursor16),
            "newText": item.insert_text,
        });
    }
    value
}
