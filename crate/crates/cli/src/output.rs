//! Report envelope and rendering: every command echoes its configuration and
//! seed, then emits a table, JSON, or CSV view of the same payload.

use clap::ValueEnum;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use volcone_core::{decimal_12, fmt_rat, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Payload of one command run, rendered lazily per format.
pub struct Rendered {
    pub result: serde_json::Value,
    pub table: String,
    pub csv: Option<String>,
    /// A probe or assertion violation: exit code 1.
    pub violation: bool,
}

impl Rendered {
    pub fn new(result: serde_json::Value, table: String) -> Self {
        Rendered {
            result,
            table,
            csv: None,
            violation: false,
        }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn with_violation(mut self, violation: bool) -> Self {
        self.violation = violation;
        self
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a BTreeMap<String, String>,
    seed: u64,
    timestamp: String,
    result: &'a serde_json::Value,
}

/// Exact rational as a JSON object with authoritative exact field and a
/// 12-significant-digit decimal.
pub fn rational_value(r: &Rat) -> serde_json::Value {
    serde_json::json!({ "exact": fmt_rat(r), "decimal": decimal_12(r) })
}

pub fn float_value(x: f64) -> serde_json::Value {
    serde_json::json!(format!("{x:.12e}"))
}

/// Human-readable `exact (decimal)` pair.
pub fn rational_text(r: &Rat) -> String {
    format!("{} ({})", fmt_rat(r), decimal_12(r))
}

/// Fallback CSV: flattened `key,value` rows of the JSON payload.
fn flatten_csv(prefix: &str, value: &serde_json::Value, rows: &mut Vec<String>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_csv(&key, v, rows);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_csv(&format!("{prefix}[{i}]"), v, rows);
            }
        }
        other => rows.push(format!("{prefix},{other}")),
    }
}

/// Write the report in the requested format; returns the process exit code.
pub fn emit(
    format: Format,
    out: Option<&Path>,
    command: &str,
    config: BTreeMap<String, String>,
    seed: u64,
    rendered: Rendered,
) -> std::io::Result<u8> {
    let text = match format {
        Format::Json => {
            let envelope = Envelope {
                command,
                version: env!("CARGO_PKG_VERSION"),
                config: &config,
                seed,
                timestamp: chrono::Utc::now().to_rfc3339(),
                result: &rendered.result,
            };
            let mut s = serde_json::to_string_pretty(&envelope).expect("serializable");
            s.push('\n');
            s
        }
        Format::Table => {
            let mut s = String::new();
            s.push_str(&format!("# volcone {command}\n"));
            for (k, v) in &config {
                s.push_str(&format!("# {k} = {v}\n"));
            }
            s.push_str(&rendered.table);
            if !s.ends_with('\n') {
                s.push('\n');
            }
            if rendered.violation {
                s.push_str("VIOLATION\n");
            }
            s
        }
        Format::Csv => match &rendered.csv {
            Some(csv) => csv.clone(),
            None => {
                let mut rows = vec!["key,value".to_string()];
                flatten_csv("", &rendered.result, &mut rows);
                rows.join("\n") + "\n"
            }
        },
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(u8::from(rendered.violation))
}
