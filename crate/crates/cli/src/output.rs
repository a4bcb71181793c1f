//! File emission: atomic writes, CSV tables and JSON documents.

use std::fs;
use std::io::Write;
use std::path::Path;

use qdyn_core::TimeSeries;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Write through a sibling temporary file and rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    let mut file = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    file.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_series(path: &Path, series: &TimeSeries) -> CliResult<()> {
    let mut buf = Vec::new();
    series.write_csv(&mut buf).map_err(|e| CliError::io(path, e))?;
    write_atomic(path, &buf)
}

/// Numeric leaves of a JSON object as `(dotted.key, value)`; arrays are skipped.
pub fn numeric_leaves(value: &Value) -> Vec<(String, f64)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, f64)>) {
        match v {
            Value::Number(n) => {
                if let Some(x) = n.as_f64() {
                    out.push((prefix.to_string(), x));
                }
            }
            Value::Object(map) => {
                for (k, child) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, child, out);
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

/// One row per sweep point: the swept value, then every numeric summary entry.
/// Missing entries (failed points) are left as `NaN`.
pub fn sweep_table(param: &str, rows: &[(f64, Option<&Value>)]) -> String {
    let mut columns: Vec<String> = Vec::new();
    let leaves: Vec<Vec<(String, f64)>> = rows.iter().map(|(_, s)| s.map(numeric_leaves).unwrap_or_default()).collect();
    for row in &leaves {
        for (k, _) in row {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut text = param.to_string();
    for c in &columns {
        text.push(',');
        text.push_str(c);
    }
    text.push('\n');
    for ((value, _), row) in rows.iter().zip(&leaves) {
        text.push_str(&format!("{value:.16e}"));
        for c in &columns {
            let x = row.iter().find(|(k, _)| k == c).map_or(f64::NAN, |(_, x)| *x);
            text.push_str(&format!(",{x:.16e}"));
        }
        text.push('\n');
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        write_json(&path, &json!({"x": 1})).unwrap();
        write_json(&path, &json!({"x": 2})).unwrap();
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
        let back: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back["x"], 2);
    }

    #[test]
    fn table_flattens_nested_numbers() {
        let a = json!({"rh": {"order_parameter": 0.5}, "kinks": [1.0], "detuning": 2.0});
        let text = sweep_table("x", &[(1.0, Some(&a)), (2.0, None)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,detuning,rh.order_parameter");
        assert!(lines[2].ends_with("NaN,NaN"));
    }
}
