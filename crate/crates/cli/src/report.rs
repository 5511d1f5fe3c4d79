//! Deterministic report emission: schema-versioned JSON with input digests.
//! Two runs on the same inputs produce byte-identical files; wall time is
//! recorded only when VLAB_TIMING=1 so it never breaks determinism.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

pub struct Report {
    command: Vec<String>,
    inputs: Vec<(String, String)>,
    started: Instant,
}

impl Report {
    pub fn new(command: Vec<String>) -> Self {
        Report {
            command,
            inputs: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Records a sha256 digest of an input file's raw bytes.
    pub fn digest_input(&mut self, path: &Path, bytes: &[u8]) {
        let mut h = Sha256::new();
        h.update(bytes);
        self.inputs
            .push((path.display().to_string(), format!("{:x}", h.finalize())));
    }

    pub fn finish(self, results: Value) -> Value {
        let inputs: serde_json::Map<String, Value> = self
            .inputs
            .into_iter()
            .map(|(k, v)| (k, Value::String(v)))
            .collect();
        let mut report = json!({
            "schema_version": SCHEMA_VERSION,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "inputs": inputs,
            "results": results,
        });
        if std::env::var("VLAB_TIMING").as_deref() == Ok("1") {
            report["wall_ms"] = json!(self.started.elapsed().as_millis() as u64);
        }
        report
    }
}

/// Writes the report atomically (temp file, then rename) with a trailing
/// newline.
pub fn write_report(path: &Path, report: &Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
