//! Batch front end: transpile, check, complete, coverage reports and the
//! language server.

pub mod check;
pub mod complete;
pub mod corpus;
pub mod transpile;

use std::io::Write;
use std::path::Path;

/// Replaces `path` with `contents` through a temporary file in the same
/// directory, keeping the original permissions.
pub fn write_atomically(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    if let Ok(meta) = std::fs::metadata(path) {
        tmp.as_file().set_permissions(meta.permissions())?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
