//! Deterministic report writing: sorted JSON keys, six significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Rounds to six significant digits; non-finite values become `null`.
pub fn round6(x: f64) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(0.0);
    }
    format!("{x:.5e}").parse().ok()
}

pub fn fmt6(x: Option<f64>) -> String {
    x.and_then(round6).map(|v| v.to_string()).unwrap_or_default()
}

/// Serializes and rounds every float in the tree.
pub fn to_value<S: Serialize>(value: &S) -> Value {
    round_floats(serde_json::to_value(value).expect("report serializes"))
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().and_then(round6).map_or(Value::Null, Value::from),
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Provenance block: tool version, the exact arguments, and a content hash per input.
pub struct Manifest {
    command: String,
    args: Vec<String>,
    inputs: Vec<(String, PathBuf)>,
}

impl Manifest {
    pub fn new(command: &str, args: &[String]) -> Self {
        Manifest {
            command: command.to_string(),
            args: args.to_vec(),
            inputs: Vec::new(),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) {
        self.inputs.push((role.to_string(), path.to_path_buf()));
    }

    fn to_value(&self) -> Result<Value, Failure> {
        let mut inputs = Map::new();
        for (role, path) in &self.inputs {
            let bytes = fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let mut entry = Map::new();
            entry.insert("path".into(), Value::from(path.display().to_string()));
            entry.insert("sha256".into(), Value::from(hex::encode(Sha256::digest(&bytes))));
            inputs.insert(role.clone(), Value::Object(entry));
        }
        let mut m = Map::new();
        m.insert("tool".into(), Value::from(env!("CARGO_PKG_NAME")));
        m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        m.insert("command".into(), Value::from(self.command.clone()));
        m.insert("args".into(), Value::from(self.args.clone()));
        m.insert("inputs".into(), Value::Object(inputs));
        Ok(Value::Object(m))
    }
}

/// Writes `body` plus the manifest as pretty JSON to `out`, or stdout.
pub fn write_report(mut body: Map<String, Value>, manifest: &Manifest, out: Option<&Path>) -> Result<(), Failure> {
    body.insert("run_manifest".into(), manifest.to_value()?);
    let mut text = serde_json::to_string_pretty(&Value::Object(body)).expect("json");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), Failure> {
    let fail = |e: csv::Error| Failure::Runtime(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.flush()
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(round6(0.325_727_6), Some(0.325728));
        assert_eq!(round6(1.0), Some(1.0));
        assert_eq!(round6(-123_456_789.0), Some(-123_457_000.0));
        assert_eq!(round6(f64::NAN), None);
        assert_eq!(fmt6(Some(0.027_524_3)), "0.0275243");
        assert_eq!(fmt6(None), "");
    }

    #[test]
    fn nested_floats_rounded() {
        let v = to_value(&serde_json::json!({"a": [0.123456789, 2], "b": {"c": 1.0000001}}));
        assert_eq!(v.to_string(), r#"{"a":[0.123457,2],"b":{"c":1.0}}"#);
    }
}
