//! Output formatting. Every float is written with 17 significant digits so
//! values round-trip exactly through the text.

use std::fmt::Write;

use mmrisk_core::montecarlo::SweepRow;
use serde_json::Value;

pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Compact JSON with floats in `float` form; non-finite floats become null.
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(num) => {
            if num.is_f64() {
                match num.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&float(x)),
                    _ => out.push_str("null"),
                }
            } else {
                let _ = write!(out, "{num}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                write_value(out, item);
            }
            out.push('}');
        }
    }
}

pub const CSV_HEADER: &str = "axis,value,n,method,risk,normalized_risk,stderr";

pub fn csv_row(row: &SweepRow) -> String {
    let r = &row.report;
    format!(
        "{},{},{},{},{},{},{}",
        row.axis,
        float(row.value),
        r.n,
        r.method,
        float(r.risk),
        float(r.normalized_risk),
        r.stderr.map(float).unwrap_or_default()
    )
}
