//! Report emission: JSON and CSV rendering with atomic writes.
//!
//! Every report embeds the resolved configuration so that output files are
//! self-describing; identical configurations produce byte-identical files
//! once the (optional) timestamp is disabled.

use crate::error::{DiscLabError, Result};
use serde::Serialize;
use serde_json::Value;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = DiscLabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(DiscLabError::Config(format!(
                "unknown output format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Envelope around one run's results.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub config: Value,
    pub payload: Value,
}

impl Report {
    pub fn new<P: Serialize>(kind: &str, config: Value, payload: &P) -> Result<Self> {
        Ok(Self {
            kind: kind.to_string(),
            timestamp: None,
            config,
            payload: serde_json::to_value(payload)?,
        })
    }

    /// Stamp with the current Unix time; omitted under --no-timestamp.
    pub fn with_timestamp(mut self) -> Self {
        self.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Tabular rendering. Arrays of records become one row per record;
    /// payloads carrying a `points` or `rows` array are flattened to that
    /// table; scalar payloads become a key,value listing.
    pub fn to_csv_string(&self) -> Result<String> {
        let table = match &self.payload {
            Value::Array(items) => items.clone(),
            Value::Object(map) => {
                if let Some(Value::Array(pts)) = map.get("points") {
                    pts.clone()
                } else if let Some(Value::Array(rows)) = map.get("rows") {
                    rows.clone()
                } else {
                    // key,value listing of scalar fields
                    let mut out = String::from("key,value\n");
                    for (k, v) in map {
                        if !matches!(v, Value::Array(_) | Value::Object(_)) {
                            out.push_str(&format!("{k},{}\n", csv_scalar(v)));
                        }
                    }
                    return Ok(out);
                }
            }
            other => {
                return Ok(format!("value\n{}\n", csv_scalar(other)));
            }
        };
        let mut out = String::new();
        let mut header: Vec<String> = Vec::new();
        for item in &table {
            if let Value::Object(map) = item {
                if header.is_empty() {
                    header = map.keys().cloned().collect();
                    out.push_str(&header.join(","));
                    out.push('\n');
                }
                let row: Vec<String> = header
                    .iter()
                    .map(|k| map.get(k).map(csv_scalar).unwrap_or_default())
                    .collect();
                out.push_str(&row.join(","));
                out.push('\n');
            } else {
                out.push_str(&csv_scalar(item));
                out.push('\n');
            }
        }
        Ok(out)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json_string(),
            OutputFormat::Csv => self.to_csv_string(),
        }
    }
}

fn csv_scalar(v: &Value) -> String {
    match v {
        Value::String(s) => {
            if s.contains(',') || s.contains('"') {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Value::Null => String::new(),
        Value::Array(_) | Value::Object(_) => {
            let s = v.to_string();
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        other => other.to_string(),
    }
}

/// Write via a temporary file in the same directory plus rename, so readers
/// never observe a half-written report.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| "report".into())
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.to_string_lossy()
        ))
        .to_path_buf(),
    };
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_round_trip_and_timestamp_control() {
        let payload = json!({"value": 1.5, "method": "parseval"});
        let r = Report::new("discrepancy", json!({"n": 4}), &payload).unwrap();
        let text = r.to_json_string().unwrap();
        assert!(text.contains("\"parseval\""));
        assert!(!text.contains("timestamp"));
        let stamped = r.clone().with_timestamp();
        assert!(stamped.to_json_string().unwrap().contains("timestamp"));
    }

    #[test]
    fn csv_from_points_table() {
        let payload = json!({"points": [
            {"theta": 0, "x": 1.0, "value": 2.5},
            {"theta": 1, "x": 2.0, "value": 3.5}
        ], "verdict": true});
        let r = Report::new("check", json!({}), &payload).unwrap();
        let csv = r.to_csv_string().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "theta,x,value");
        assert_eq!(lines.next().unwrap(), "0,1.0,2.5");
    }

    #[test]
    fn csv_from_scalar_payload() {
        let payload = json!({"value": 0.25, "method": "mc"});
        let r = Report::new("discrepancy", json!({}), &payload).unwrap();
        let csv = r.to_csv_string().unwrap();
        assert!(csv.starts_with("key,value\n"));
        assert!(csv.contains("method,mc"));
    }

    #[test]
    fn atomic_write_creates_file() {
        let dir = std::env::temp_dir().join("disclab-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.json");
        write_atomic(&path, "{\"ok\":true}\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "{\"ok\":true}\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
