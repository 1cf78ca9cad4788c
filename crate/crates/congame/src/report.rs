//! Run reports with a stable JSON schema: a deterministic `payload` (same
//! inputs and seed give identical bytes), free-form `stats` counters, and the
//! wall time kept outside the payload so golden comparisons stay exact.

use std::io::Write;

use serde_json::{json, Map, Value};

#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: String,
    pub graph: Option<Value>,
    pub payload: Value,
    pub stats: Value,
    pub wall_ms: u128,
}

impl RunReport {
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("command".into(), Value::String(self.command.clone()));
        if let Some(g) = &self.graph {
            map.insert("graph".into(), g.clone());
        }
        map.insert("payload".into(), self.payload.clone());
        map.insert("stats".into(), self.stats.clone());
        map.insert("wall_ms".into(), json!(self.wall_ms));
        Value::Object(map)
    }
}

pub fn graph_summary(g: &crate::graph::Graph) -> Value {
    json!({
        "digest": crate::graph::digest(g),
        "n": g.n(),
        "m": g.edge_count(),
    })
}

/// Serializes the report as canonical JSON: object keys sorted (serde_json's
/// default map is ordered), two-space indentation, one trailing newline.
/// Returns the number of bytes written.
pub fn emit_report(report: &RunReport, sink: &mut dyn Write) -> std::io::Result<usize> {
    let text = serde_json::to_string_pretty(&report.to_json())
        .expect("report serialization cannot fail");
    sink.write_all(text.as_bytes())?;
    sink.write_all(b"\n")?;
    Ok(text.len() + 1)
}
