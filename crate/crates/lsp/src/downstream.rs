//! Child language server behind the hub.
//!
//! Client messages go to the child's stdin in arrival order; a relay thread
//! copies the child's stdout to the client untouched. The hub performs its
//! own `initialize` handshake with the child and swallows the replies to
//! requests it issued itself.

use std::collections::HashSet;
use std::io::{self, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::dispatch::INTERNAL_ERROR;
use crate::transport::{read_message, write_message};

/// Ids of requests the hub sends itself start with this.
pub const HUB_ID_PREFIX: &str = "tabledsl-hub-";
const INIT_ID: &str = "tabledsl-hub-init";
const SHUTDOWN_ID: &str = "tabledsl-hub-shutdown";
const INIT_TIMEOUT: Duration = Duration::from_secs(10);

pub type SharedWriter = Arc<Mutex<dyn Write + Send>>;

pub struct Downstream {
    child: Child,
    stdin: ChildStdin,
    alive: Arc<AtomicBool>,
    /// Forwarded client requests still waiting for an answer, keyed by the
    /// serialized id.
    pending: Arc<Mutex<HashSet<String>>>,
    relay: Option<JoinHandle<()>>,
}

impl Downstream {
    /// Starts `argv` and completes the `initialize` handshake.
    pub fn spawn(
        argv: &[String],
        client: SharedWriter,
        init_params: &Value,
    ) -> io::Result<Downstream> {
        let (program, args) = argv.split_first().ok_or_else(|| {
            io::Error::new(io::ErrorKind::InvalidInput, "empty downstream command")
        })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let alive = Arc::new(AtomicBool::new(true));
        let pending = Arc::new(Mutex::new(HashSet::new()));
        let (init_tx, init_rx) = mpsc::channel();
        let relay = {
            let alive = Arc::clone(&alive);
            let pending = Arc::clone(&pending);
            std::thread::Builder::new()
                .name("downstream-relay".into())
                .spawn(move || relay(BufReader::new(stdout), client, alive, pending, init_tx))?
        };
        let mut downstream = Downstream {
            child,
            stdin,
            alive,
            pending,
            relay: Some(relay),
        };
        downstream.send(&json!({
            "jsonrpc": "2.0", "id": INIT_ID, "method": "initialize", "params": init_params,
        }))?;
        if init_rx.recv_timeout(INIT_TIMEOUT).is_err() {
            downstream.kill();
            return Err(io::Error::new(
                io::ErrorKind::TimedOut,
                "downstream server did not answer initialize",
            ));
        }
        downstream.send(&json!({"jsonrpc": "2.0", "method": "initialized", "params": {}}))?;
        Ok(downstream)
    }

    pub fn is_alive(&self) -> bool {
        self.alive.load(Ordering::SeqCst)
    }

    pub fn send(&mut self, msg: &Value) -> io::Result<()> {
        let body = serde_json::to_vec(msg).map_err(io::Error::other)?;
        self.forward(&body)
    }

    /// Writes a client message unchanged.
    pub fn forward(&mut self, body: &[u8]) -> io::Result<()> {
        if !self.is_alive() {
            return Err(io::Error::new(
                io::ErrorKind::BrokenPipe,
                "downstream exited",
            ));
        }
        let result = write_message(&mut self.stdin, body);
        if result.is_err() {
            self.alive.store(false, Ordering::SeqCst);
        }
        result
    }

    /// Forwards a request and remembers its id so a crash can be answered.
    pub fn forward_request(&mut self, id: &Value, body: &[u8]) -> io::Result<()> {
        let key = id.to_string();
        self.pending.lock().unwrap().insert(key.clone());
        let result = self.forward(body);
        if result.is_err() {
            self.pending.lock().unwrap().remove(&key);
        }
        result
    }

    /// Polite shutdown, then kill if the child lingers.
    pub fn shutdown(mut self) {
        if self.is_alive() {
            let _ = self.send(&json!({"jsonrpc": "2.0", "id": SHUTDOWN_ID, "method": "shutdown"}));
            let _ = self.send(&json!({"jsonrpc": "2.0", "method": "exit"}));
            let deadline = Instant::now() + Duration::from_secs(2);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = self.child.try_wait() {
                    break;
                }
                std::thread::sleep(Duration::from_millis(20));
            }
        }
        self.kill();
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
        if let Some(relay) = self.relay.take() {
            let _ = relay.join();
        }
    }
}

fn relay(
    mut stdout: BufReader<std::process::ChildStdout>,
    client: SharedWriter,
    alive: Arc<AtomicBool>,
    pending: Arc<Mutex<HashSet<String>>>,
    init_done: mpsc::Sender<()>,
) {
    loop {
        let body = match read_message(&mut stdout) {
            Ok(Some(body)) => body,
            Ok(None) => break,
            Err(err) => {
                log::warn!("downstream framing error: {err}");
                break;
            }
        };
        let msg: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
        let is_response = msg.get("method").is_none();
        if let (true, Some(id)) = (is_response, msg.get("id")) {
            if id.as_str().is_some_and(|id| id.starts_with(HUB_ID_PREFIX)) {
                if id == INIT_ID {
                    let _ = init_done.send(());
                }
                continue;
            }
            pending.lock().unwrap().remove(&id.to_string());
        }
        if let Err(err) = write_message(&mut *client.lock().unwrap(), &body) {
            log::error!("cannot write to client: {err}");
            break;
        }
    }
    alive.store(false, Ordering::SeqCst);
    let orphans: Vec<String> = pending.lock().unwrap().drain().collect();
    if !orphans.is_empty() {
        log::warn!(
            "downstream server exited with {} request(s) unanswered",
            orphans.len()
        );
    }
    for key in orphans {
        let id: Value = serde_json::from_str(&key).unwrap_or(Value::Null);
        let reply = json!({
            "jsonrpc": "2.0", "id": id,
            "error": {"code": INTERNAL_ERROR, "message": "downstream language server exited"},
        });
        let body = serde_json::to_vec(&reply).expect("json");
        let _ = write_message(&mut *client.lock().unwrap(), &body);
    }
}
