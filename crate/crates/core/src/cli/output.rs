//! Deterministic CSV/JSON writers.

use std::env;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

pub const OUT_DIR_ENV: &str = "PBPHASE_OUT_DIR";

/// Shortest round-trip representation; non-finite values print as `NaN`,
/// `inf` or `-inf`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        ryu::Buffer::new().format_finite(v).to_string()
    }
}

/// 17 significant digits.
pub fn fmt_sig17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        fmt_num(v)
    }
}

pub fn json_num(v: f64) -> Value {
    // serde_json writes finite f64 with ryu; NaN has no JSON form
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn json_opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, json_num)
}

/// Metadata block shared by every output.
#[derive(Debug, Clone, Default)]
pub struct Meta(pub Vec<(String, String)>);

impl Meta {
    pub fn new(mut entries: Vec<(String, String)>) -> Self {
        entries.insert(0, ("version".to_string(), format!("pbphase {}", env!("CARGO_PKG_VERSION"))));
        Meta(entries)
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.0.push((key.to_string(), value.into()));
    }

    fn csv_header(&self) -> String {
        self.0.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
    }

    pub fn json(&self) -> Value {
        let map: Map<String, Value> = self
            .0
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        Value::Object(map)
    }
}

/// A CSV table: `#` header, column row, data rows, LF endings.
pub fn csv_table(meta: &Meta, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = meta.csv_header();
    s.push_str(&columns.join(","));
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// `{"meta": ..., "rows": [...]}` with each row keyed by column name.
pub fn json_table(meta: &Meta, columns: &[&str], rows: impl IntoIterator<Item = Vec<Value>>) -> String {
    let rows: Vec<Value> = rows
        .into_iter()
        .map(|r| {
            Value::Object(columns.iter().map(|c| c.to_string()).zip(r).collect())
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("meta".to_string(), meta.json());
    obj.insert("rows".to_string(), Value::Array(rows));
    json_string(&Value::Object(obj))
}

pub fn json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// `--out`, else `$PBPHASE_OUT_DIR/<default_name>`, else stdout (`None`).
pub fn resolve_target(out: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    if let Some(p) = out {
        return Some(p.to_path_buf());
    }
    match env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => Some(PathBuf::from(dir).join(default_name)),
        _ => None,
    }
}

pub fn emit(target: Option<&Path>, content: &str) -> io::Result<()> {
    match target {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, content)
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()
        }
    }
}
