//! Decides who answers a client message.

use serde_json::Value;
use tabledsl::{detect_dsl_line, parse_line, ChainOp, Target};

use crate::config::HubConfig;
use crate::store::DocumentStore;

pub const PARSE_ERROR: i64 = -32700;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;
pub const INTERNAL_ERROR: i64 = -32603;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Answered by the DSL recommender.
    LocalDsl,
    /// Forwarded verbatim to the downstream server.
    Downstream,
    /// Handled by the hub and duplicated to the downstream server.
    Both,
    /// Nobody can answer.
    Unhandled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RpcError {
    pub code: i64,
    pub message: String,
}

impl RpcError {
    pub fn invalid_params(message: impl Into<String>) -> RpcError {
        RpcError {
            code: INVALID_PARAMS,
            message: message.into(),
        }
    }
}

/// Document URI and zero-based line/character of a positional request.
pub fn text_position(params: &Value) -> Result<(&str, usize, usize), RpcError> {
    let uri = params["textDocument"]["uri"]
        .as_str()
        .ok_or_else(|| RpcError::invalid_params("missing textDocument.uri"))?;
    let line = params["position"]["line"]
        .as_u64()
        .ok_or_else(|| RpcError::invalid_params("missing position.line"))?;
    let character = params["position"]["character"]
        .as_u64()
        .ok_or_else(|| RpcError::invalid_params("missing position.character"))?;
    Ok((uri, line as usize, character as usize))
}

pub fn dispatch(msg: &Value, store: &DocumentStore, config: &HubConfig) -> Result<Route, RpcError> {
    let elsewhere = if config.downstream_cmd.is_some() {
        Route::Downstream
    } else {
        Route::Unhandled
    };
    let Some(method) = msg.get("method").and_then(Value::as_str) else {
        // A response to a request the downstream server sent the client.
        return Ok(elsewhere);
    };
    match method {
        "initialize" | "initialized" | "shutdown" | "exit" => Ok(Route::Both),
        "textDocument/didOpen" | "textDocument/didChange" | "textDocument/didClose" => {
            Ok(Route::Both)
        }
        "textDocument/completion" => {
            let (uri, line, _) = text_position(&msg["params"])?;
            let doc = store
                .get(uri)
                .ok_or_else(|| RpcError::invalid_params(format!("document {uri} is not open")))?;
            let text = doc.lines.get(line).ok_or_else(|| {
                RpcError::invalid_params(format!(
                    "line {line} out of range; {uri} has {} lines",
                    doc.lines.len()
                ))
            })?;
            if detect_dsl_line(text, &config.dsl_prefix).is_dsl {
                Ok(Route::LocalDsl)
            } else {
                Ok(elsewhere)
            }
        }
        _ => Ok(elsewhere),
    }
}

/// Target chosen by the nearest `target_code` statement above `line_no`.
pub fn target_state(
    store: &DocumentStore,
    uri: &str,
    line_no: usize,
    config: &HubConfig,
) -> Target {
    let Some(doc) = store.get(uri) else {
        return config.default_target;
    };
    let end = line_no.min(doc.lines.len());
    doc.lines[..end]
        .iter()
        .rev()
        .find_map(|line| target_option(line, &config.dsl_prefix))
        .unwrap_or(config.default_target)
}

fn target_option(line: &str, prefix: &str) -> Option<Target> {
    let detection = detect_dsl_line(line, prefix);
    if !detection.is_dsl {
        return None;
    }
    let parsed = parse_line(&line[detection.payload_offset..]).ok()?;
    match parsed.chain.as_slice() {
        [ChainOp::TargetOption { target }] => Some(*target),
        _ => None,
    }
}
