use std::io::Cursor;
use std::path::Path;
use std::process::Command;
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};
use tabledsl::Target;
use tabledsl_lsp::transport::{read_message, write_message};
use tabledsl_lsp::{serve, HubConfig, SharedWriter};

const URI: &str = "file:///work/etl.py";

fn frame(messages: &[Value]) -> Vec<u8> {
    let mut out = Vec::new();
    for msg in messages {
        write_message(&mut out, &serde_json::to_vec(msg).unwrap()).unwrap();
    }
    out
}

/// Runs a whole session and returns the exit code and every message the hub
/// wrote, as raw bodies.
fn run(config: HubConfig, messages: &[Value]) -> (i32, Vec<Vec<u8>>) {
    let sink = Arc::new(Mutex::new(Vec::<u8>::new()));
    let out: SharedWriter = sink.clone();
    let code = serve(config, Cursor::new(frame(messages)), out);
    let bytes = sink.lock().unwrap().clone();
    let mut reader = Cursor::new(bytes);
    let mut bodies = Vec::new();
    while let Some(body) = read_message(&mut reader).unwrap() {
        bodies.push(body);
    }
    (code, bodies)
}

fn parsed(bodies: &[Vec<u8>]) -> Vec<Value> {
    bodies
        .iter()
        .map(|b| serde_json::from_slice(b).unwrap())
        .collect()
}

fn response(msgs: &[Value], id: i64) -> &Value {
    msgs.iter()
        .find(|m| m["id"] == json!(id) && m.get("method").is_none())
        .unwrap_or_else(|| panic!("no response to {id} in {msgs:#?}"))
}

fn request(id: i64, method: &str, params: Value) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "method": method, "params": params})
}

fn notification(method: &str, params: Value) -> Value {
    json!({"jsonrpc": "2.0", "method": method, "params": params})
}

fn open(text: &str) -> Value {
    notification(
        "textDocument/didOpen",
        json!({"textDocument": {"uri": URI, "languageId": "python", "version": 1, "text": text}}),
    )
}

fn completion(id: i64, line: u64, character: u64) -> Value {
    request(
        id,
        "textDocument/completion",
        json!({"textDocument": {"uri": URI}, "position": {"line": line, "character": character}}),
    )
}

fn labels(result: &Value) -> Vec<&str> {
    result["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["label"].as_str().unwrap())
        .collect()
}

fn ending() -> [Value; 2] {
    [
        request(999, "shutdown", Value::Null),
        notification("exit", Value::Null),
    ]
}

fn python() -> Option<&'static str> {
    Command::new("python3")
        .arg("--version")
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|_| "python3")
}

fn downstream_config(extra: &[&str]) -> Option<HubConfig> {
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fake_downstream.py");
    let mut argv = vec![python()?.to_string(), script.display().to_string()];
    argv.extend(extra.iter().map(|s| s.to_string()));
    Some(HubConfig {
        downstream_cmd: Some(argv),
        ..HubConfig::default()
    })
}

#[test]
fn initialize_advertises_completion() {
    let mut session = vec![request(1, "initialize", json!({"capabilities": {}}))];
    session.extend(ending());
    let (code, bodies) = run(HubConfig::default(), &session);
    assert_eq!(code, 0);
    let msgs = parsed(&bodies);
    let caps = &response(&msgs, 1)["result"]["capabilities"];
    assert_eq!(
        caps["completionProvider"]["triggerCharacters"],
        json!([" ", ":"])
    );
    assert_eq!(caps["textDocumentSync"]["change"], json!(2));
    assert_eq!(response(&msgs, 999)["result"], Value::Null);
}

#[test]
fn dsl_completion_is_local() {
    let text = "import pandas as pd\n## x = on y : sel\n    ## x = on y : show\nprint(x)";
    let mut session = vec![
        request(1, "initialize", json!({})),
        open(text),
        completion(2, 1, 17),
        completion(3, 2, 22),
        completion(4, 3, 3),
        completion(5, 7, 0),
        request(6, "textDocument/hover", json!({})),
    ];
    session.extend(ending());
    let (code, bodies) = run(HubConfig::default(), &session);
    assert_eq!(code, 0);
    let msgs = parsed(&bodies);

    let sel = &response(&msgs, 2)["result"];
    assert_eq!(labels(sel), ["select_cols", "select_rows"]);
    let edit = &sel["items"][0]["textEdit"];
    assert_eq!(edit["range"]["start"]["character"], json!(14));
    assert_eq!(edit["newText"], json!("select_cols"));

    let show = &response(&msgs, 3)["result"]["items"][0];
    assert_eq!(show["label"], json!("⇒ x = print(y)"));
    assert_eq!(show["sortText"], json!("0001"));
    assert_eq!(
        show["textEdit"]["newText"],
        json!("\n    x = print(y)  # <tabledsl>")
    );
    assert_eq!(
        show["textEdit"]["range"]["start"],
        json!({"line": 2, "character": 22})
    );
    assert!(show.get("additionalTextEdits").is_none());

    assert_eq!(response(&msgs, 4)["result"], json!([]));
    assert_eq!(response(&msgs, 5)["error"]["code"], json!(-32602));
    assert_eq!(response(&msgs, 6)["error"]["code"], json!(-32601));
}

#[test]
fn preview_replaces_earlier_output() {
    let text = "## on y : describe\ny.old()  # <tabledsl>";
    let mut session = vec![open(text), completion(1, 0, 18)];
    session.extend(ending());
    let (_, bodies) = run(HubConfig::default(), &session);
    let msgs = parsed(&bodies);
    let item = &response(&msgs, 1)["result"]["items"][0];
    assert_eq!(item["label"], json!("⇒ y.describe()"));
    assert_eq!(item["textEdit"]["newText"], json!(""));
    let below = &item["additionalTextEdits"][0];
    assert_eq!(below["newText"], json!("y.describe()  # <tabledsl>"));
    assert_eq!(
        below["range"],
        json!({"start": {"line": 1, "character": 0}, "end": {"line": 1, "character": 21}})
    );
}

#[test]
fn target_option_switches_backend() {
    let text = "## target_code = spark\n## x = on y : show";
    let mut session = vec![open(text), completion(1, 1, 18)];
    session.extend(ending());
    let (_, bodies) = run(HubConfig::default(), &session);
    let msgs = parsed(&bodies);
    assert_eq!(
        response(&msgs, 1)["result"]["items"][0]["label"],
        json!("⇒ x = y.show()")
    );
    let config = HubConfig {
        default_target: Target::Spark,
        ..HubConfig::default()
    };
    let mut session = vec![open("## x = on y : describe"), completion(1, 0, 22)];
    session.extend(ending());
    let (_, bodies) = run(config, &session);
    assert_eq!(
        response(&parsed(&bodies), 1)["result"]["items"][0]["label"],
        json!("⇒ x = y.describe().show()")
    );
}

#[test]
fn diagnostics_follow_edits() {
    let change = notification(
        "textDocument/didChange",
        json!({"textDocument": {"uri": URI, "version": 2},
               "contentChanges": [{"range": {"start": {"line": 0, "character": 14},
                                             "end": {"line": 0, "character": 19}},
                                   "text": "show"}]}),
    );
    let mut session = vec![open("## x = on y : bogus\nimport os"), change];
    session.extend(ending());
    let (_, bodies) = run(HubConfig::default(), &session);
    let diags: Vec<Value> = parsed(&bodies)
        .into_iter()
        .filter(|m| m["method"] == json!("textDocument/publishDiagnostics"))
        .map(|m| m["params"]["diagnostics"].clone())
        .collect();
    assert_eq!(diags.len(), 2);
    let first = &diags[0][0];
    assert_eq!(first["range"]["start"], json!({"line": 0, "character": 14}));
    assert_eq!(first["range"]["end"], json!({"line": 0, "character": 19}));
    assert!(first["message"].as_str().unwrap().contains("select_cols"));
    assert_eq!(diags[1], json!([]));
}

#[test]
fn stale_change_is_ignored() {
    let stale = notification(
        "textDocument/didChange",
        json!({"textDocument": {"uri": URI, "version": 1},
               "contentChanges": [{"text": "import os"}]}),
    );
    let mut session = vec![open("## x = on y : sh"), stale, completion(1, 0, 16)];
    session.extend(ending());
    let (_, bodies) = run(HubConfig::default(), &session);
    assert_eq!(labels(&response(&parsed(&bodies), 1)["result"]), ["show"]);
}

#[test]
fn framing_error_terminates() {
    let sink = Arc::new(Mutex::new(Vec::<u8>::new()));
    let out: SharedWriter = sink.clone();
    let code = serve(
        HubConfig::default(),
        Cursor::new(b"Content-Type: nope\r\n\r\n{}".to_vec()),
        out,
    );
    assert_eq!(code, 1);
}

#[test]
fn exit_without_shutdown_is_an_error() {
    let (code, _) = run(HubConfig::default(), &[notification("exit", Value::Null)]);
    assert_eq!(code, 1);
}

#[test]
fn non_dsl_requests_are_proxied_verbatim() {
    let Some(config) = downstream_config(&[]) else {
        eprintln!("python3 not available; skipping");
        return;
    };
    let change = notification(
        "textDocument/didChange",
        json!({"textDocument": {"uri": URI, "version": 2},
               "contentChanges": [{"text": "import os\n## x = on y : show"}]}),
    );
    let mut session = vec![
        request(1, "initialize", json!({"capabilities": {}})),
        notification("initialized", json!({})),
        open("import os\n## x = on y : sh"),
        completion(2, 1, 16),
        completion(3, 0, 3),
        change,
        request(4, "test/stats", Value::Null),
    ];
    session.extend(ending());
    let (code, bodies) = run(config, &session);
    assert_eq!(code, 0);
    let msgs = parsed(&bodies);

    assert_eq!(labels(&response(&msgs, 2)["result"]), ["show"]);
    let relayed = bodies
        .iter()
        .find(|b| serde_json::from_slice::<Value>(b).unwrap()["id"] == json!(3))
        .unwrap();
    assert_eq!(
        relayed.as_slice(),
        br#"{"jsonrpc":"2.0","id":3,"result":{"isIncomplete":false,"items":[{"label":"from-downstream"}]}}"#
    );
    // The child was started for request 3, saw the open document replayed,
    // then the change duplicated from the client.
    let stats = &response(&msgs, 4)["result"];
    assert_eq!(stats["initialize"], json!(1));
    assert_eq!(stats["initialized"], json!(1));
    assert_eq!(stats["textDocument/didOpen"], json!(1));
    assert_eq!(stats["textDocument/didChange"], json!(1));
    assert_eq!(stats["textDocument/completion"], json!(1));
    assert!(msgs.iter().all(|m| m["id"] != json!("tabledsl-hub-init")));
}

#[test]
fn downstream_crash_degrades() {
    let Some(config) = downstream_config(&["--crash-on-hover"]) else {
        eprintln!("python3 not available; skipping");
        return;
    };
    let sink = Arc::new(Mutex::new(Vec::<u8>::new()));
    let out: SharedWriter = sink.clone();
    // Feed the hub from a pipe so the second hover arrives after the crash.
    let (reader, mut writer) = std::io::pipe().unwrap();
    let hub = std::thread::spawn(move || serve(config, std::io::BufReader::new(reader), out));
    let send = |w: &mut std::io::PipeWriter, msg: Value| {
        write_message(w, &serde_json::to_vec(&msg).unwrap()).unwrap()
    };
    send(&mut writer, open("import os"));
    send(&mut writer, request(1, "textDocument/hover", json!({})));
    let deadline = std::time::Instant::now() + std::time::Duration::from_secs(10);
    while !String::from_utf8_lossy(&sink.lock().unwrap())
        .contains("downstream language server exited")
    {
        assert!(
            std::time::Instant::now() < deadline,
            "no error for the orphaned request"
        );
        std::thread::sleep(std::time::Duration::from_millis(20));
    }
    send(&mut writer, request(2, "textDocument/hover", json!({})));
    send(&mut writer, completion(3, 0, 3));
    for msg in ending() {
        send(&mut writer, msg);
    }
    drop(writer);
    assert_eq!(hub.join().unwrap(), 0);

    let mut reader = Cursor::new(sink.lock().unwrap().clone());
    let mut msgs = Vec::new();
    while let Some(body) = read_message(&mut reader).unwrap() {
        msgs.push(serde_json::from_slice::<Value>(&body).unwrap());
    }
    assert_eq!(response(&msgs, 1)["error"]["code"], json!(-32603));
    assert_eq!(response(&msgs, 2)["error"]["code"], json!(-32601));
    assert_eq!(response(&msgs, 3)["result"], json!([]));
}
