//! JSON document helpers shared by checkpoints, configs, and reports.
//!
//! Pretty-printed with a trailing newline. Floats are emitted as the
//! shortest decimal that parses back to the identical 64-bit value, so every
//! JSON artifact round-trips value-exactly, and identical in-memory values
//! always produce byte-identical files.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Serializes `value` to `path` as pretty JSON plus a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)
        .with_context(|| format!("cannot serialize {}", path.display()))?;
    body.push('\n');
    fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Reads and deserializes a JSON document written by [`write_json`].
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let body =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&body).with_context(|| format!("cannot parse {}", path.display()))
}
