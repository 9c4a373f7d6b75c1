//! Result records and their table / JSON renderings.

use latticelab::theorems::{CheckReport, Status};
use serde_json::{json, Map, Value};

use crate::config::Format;

/// One emitted result.
#[derive(Debug, Clone)]
pub struct Record {
    pub id: String,
    pub value: Option<Value>,
    pub status: Option<Status>,
    pub margins: Vec<(String, f64)>,
    pub witness: Option<Value>,
    pub notes: Vec<String>,
    pub seed: u64,
}

impl Record {
    pub fn value(id: &str, value: Value, seed: u64) -> Self {
        Self {
            id: id.to_string(),
            value: Some(value),
            status: None,
            margins: Vec::new(),
            witness: None,
            notes: Vec::new(),
            seed,
        }
    }

    pub fn with_witness(mut self, witness: Value) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_margin(mut self, name: &str, v: f64) -> Self {
        self.margins.push((name.to_string(), v));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn from_report(r: &CheckReport, seed: u64) -> Self {
        let witness = if r.witnesses.is_empty() {
            None
        } else {
            Some(Value::Array(
                r.witnesses
                    .iter()
                    .map(|e| {
                        json!({
                            "label": e.label,
                            "family": e.family.iter().map(|f| vector(f)).collect::<Vec<_>>(),
                            "value": e.value.map(number),
                        })
                    })
                    .collect(),
            ))
        };
        let mut notes = r.notes.clone();
        notes.push(format!("fingerprint {}", r.fingerprint));
        Self {
            id: r.theorem_id.clone(),
            value: None,
            status: Some(r.status),
            margins: r.margins.iter().map(|m| (m.name.clone(), m.value)).collect(),
            witness,
            notes,
            seed,
        }
    }
}

/// Finite reals as JSON numbers; `±∞` and NaN as strings.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn vector(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| number(*x)).collect())
}

fn json_line(r: &Record) -> String {
    let mut obj = Map::new();
    obj.insert("id".into(), json!(r.id));
    if let Some(status) = r.status {
        obj.insert("passed".into(), json!(status == Status::Pass));
        obj.insert("status".into(), json!(status.to_string()));
    }
    if let Some(v) = &r.value {
        obj.insert("value".into(), v.clone());
    }
    let margins: Map<String, Value> = r.margins.iter().map(|(k, v)| (k.clone(), number(*v))).collect();
    obj.insert("margins".into(), Value::Object(margins));
    obj.insert("witness".into(), r.witness.clone().unwrap_or(Value::Null));
    if !r.notes.is_empty() {
        obj.insert("notes".into(), json!(r.notes));
    }
    obj.insert("seed".into(), json!(r.seed));
    Value::Object(obj).to_string()
}

fn fmt_real(x: f64, precision: usize) -> String {
    if x.is_finite() {
        format!("{x:.precision$}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Render JSON with every number rounded to `precision` decimals.
fn fmt_value(v: &Value, precision: usize) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => fmt_real(x, precision),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(|x| fmt_value(x, precision)).collect();
            format!("[{}]", inner.join(", "))
        }
        Value::Object(map) => {
            let inner: Vec<String> = map.iter().map(|(k, x)| format!("{k}: {}", fmt_value(x, precision))).collect();
            format!("{{{}}}", inner.join(", "))
        }
        other => other.to_string(),
    }
}

fn table_block(r: &Record, precision: usize) -> String {
    let mut out = String::new();
    match (r.status, &r.value) {
        (Some(s), _) => out.push_str(&format!("{:<22} {}\n", r.id, s.to_string().to_uppercase())),
        (None, Some(v)) => out.push_str(&format!("{:<22} {}\n", r.id, fmt_value(v, precision))),
        (None, None) => out.push_str(&format!("{}\n", r.id)),
    }
    for (k, v) in &r.margins {
        out.push_str(&format!("  {k:<30} {}\n", fmt_real(*v, precision)));
    }
    if let Some(w) = &r.witness {
        out.push_str(&format!("  witness {}\n", fmt_value(w, precision)));
    }
    for n in &r.notes {
        out.push_str(&format!("  note: {n}\n"));
    }
    out
}

pub fn render(records: &[Record], format: Format, precision: usize) -> String {
    let mut out = String::new();
    for r in records {
        match format {
            Format::Json => {
                out.push_str(&json_line(r));
                out.push('\n');
            }
            Format::Table => out.push_str(&table_block(r, precision)),
        }
    }
    out
}
