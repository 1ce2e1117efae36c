//! Structured event log: one JSON object per line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use anyhow::{Context, Result};
use serde_json::{json, Value};

#[derive(Default)]
pub struct EventLog {
    sink: Option<Mutex<BufWriter<File>>>,
}

impl EventLog {
    /// A log that discards everything.
    pub fn disabled() -> Self {
        EventLog { sink: None }
    }

    pub fn create(path: &Path) -> Result<Self> {
        let f = File::create(path).with_context(|| format!("creating log {}", path.display()))?;
        Ok(EventLog {
            sink: Some(Mutex::new(BufWriter::new(f))),
        })
    }

    pub fn emit(&self, event: &str, fields: Value) {
        let Some(sink) = &self.sink else { return };
        let mut line = json!({ "event": event });
        if let (Some(obj), Value::Object(extra)) = (line.as_object_mut(), fields) {
            obj.extend(extra);
        }
        let mut w = sink.lock().expect("log lock");
        if writeln!(w, "{line}").is_err() {
            log::warn!("could not write to the event log");
        }
    }

    pub fn flush(&self) {
        if let Some(sink) = &self.sink {
            let _ = sink.lock().expect("log lock").flush();
        }
    }
}
