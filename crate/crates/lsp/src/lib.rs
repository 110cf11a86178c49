//! Language server hub for the tabledsl DSL.
//!
//! Completion requests on DSL lines are answered locally. Everything else is
//! optionally proxied to a general-purpose downstream server, and document
//! sync notifications go to both.

pub mod config;
pub mod dispatch;
pub mod downstream;
pub mod hub;
pub mod store;
pub mod transport;

pub use config::HubConfig;
pub use dispatch::{dispatch, target_state, Route};
pub use downstream::SharedWriter;
pub use hub::serve;
pub use store::DocumentStore;

use std::sync::{Arc, Mutex};

/// Serves on the process's standard streams.
pub fn serve_stdio(config: HubConfig) -> i32 {
    let stdin = std::io::stdin().lock();
    let stdout: SharedWriter = Arc::new(Mutex::new(std::io::stdout()));
    serve(config, stdin, stdout)
}
