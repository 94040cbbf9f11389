//! Deterministic JSON reports: alphabetically ordered keys, 17-significant-
//! digit floats (round-trip exact), and a schema-version header with the full
//! run configuration echoed for reproducibility.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

/// Wrap a payload with the schema version and the configuration echo.
pub fn report(config: &Value, payload: Value) -> Value {
    let mut root = serde_json::Map::new();
    root.insert("schema".into(), Value::from(SCHEMA_VERSION));
    root.insert("config".into(), config.clone());
    if let Value::Object(map) = payload {
        for (k, v) in map {
            root.insert(k, v);
        }
    } else if !payload.is_null() {
        root.insert("payload".into(), payload);
    }
    Value::Object(root)
}

/// Serialize any value into the deterministic report format.
pub fn to_value<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::Config(format!("serialize: {e}")))
}

/// Pretty-print with stable formatting. `serde_json` maps already iterate in
/// sorted key order; floats are rendered with 17 significant digits.
pub fn to_pretty_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    out.push_str(&format_float(f));
                } else {
                    out.push_str(&n.to_string());
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, v, indent + 1);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// 17 significant digits; enough to reconstruct the exact f64.
fn format_float(f: f64) -> String {
    if !f.is_finite() {
        // JSON has no infinities; the ρ = ∞ sentinel round-trips as a string.
        return format!("\"{f}\"");
    }
    if f == f.trunc() && f.abs() < 1e15 {
        return format!("{f:.1}");
    }
    format!("{f:.16e}")
}

/// Write a report; parent directories are created as needed.
pub fn write_report<P: AsRef<Path>>(value: &Value, path: P) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(to_pretty_string(value).as_bytes())
        .map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip_exactly() {
        for &f in &[std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -1e-300, 0.1] {
            let s = format_float(f);
            assert_eq!(s.parse::<f64>().unwrap(), f, "{s}");
        }
        assert_eq!(format_float(2.0), "2.0");
    }

    #[test]
    fn deterministic_and_sorted() {
        let v = json!({"zeta": 1.5, "alpha": [1, 2.25], "mid": {"b": true}});
        let a = to_pretty_string(&v);
        let b = to_pretty_string(&v);
        assert_eq!(a, b);
        assert!(a.find("\"alpha\"").unwrap() < a.find("\"zeta\"").unwrap());
    }

    #[test]
    fn report_envelope() {
        let cfg = json!({"surface": "plane"});
        let r = report(&cfg, json!({"F": 0.0}));
        assert_eq!(r["schema"], 1);
        assert_eq!(r["config"]["surface"], "plane");
        assert_eq!(r["F"], 0.0);
    }
}
