use std::io::Write;

use cbop::linalg::Matrix;
use cbop::scalar::Scalar;
use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Exact values as "p/q" strings, floats as shortest round-trip numbers.
pub fn num<T: Scalar>(v: &T) -> Value {
    if T::EXACT {
        Value::String(v.to_string())
    } else {
        float(v.to_f64())
    }
}

pub fn float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(v.to_string()), Value::Number)
}

pub fn vector<T: Scalar>(v: &[T]) -> Value {
    Value::Array(v.iter().map(num).collect())
}

pub fn matrix<T: Scalar>(m: &Matrix<T>) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vector(r)).collect())
}

pub fn emit(value: &Value, format: Format) -> std::io::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten(String::new(), value, &mut rows);
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["field", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            w.flush()
        }
    }
}

/// One row per leaf, keyed by its path, e.g. `I[0][1]` or `tp.passed`.
fn flatten(path: String, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => flatten_map(&path, map, rows),
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(format!("{path}[{i}]"), v, rows);
            }
        }
        Value::String(s) => rows.push((path, s.clone())),
        Value::Null => rows.push((path, String::new())),
        other => rows.push((path, other.to_string())),
    }
}

fn flatten_map(path: &str, map: &Map<String, Value>, rows: &mut Vec<(String, String)>) {
    for (k, v) in map {
        let key = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
        flatten(key, v, rows);
    }
}
