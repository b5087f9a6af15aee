//! Number formatting and report printing.

use serde_json::{Map, Value};

/// 12 significant digits, shortest round-trip form; `inf`, `-inf`, `nan`
/// for non-finite values.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    let mag = rounded.abs();
    if !(1e-4..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

/// JSON number, or the strings `inf` / `-inf` / `nan`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(fmt12(x))
    }
}

/// Ordered flat report. Each field has a JSON value and a text rendering.
#[derive(Default)]
pub struct Report {
    fields: Vec<(String, Value, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, v: Value) {
        let text = match &v {
            Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), fmt12),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        self.fields.push((key.into(), v, text));
    }

    pub fn push_text(&mut self, key: &str, v: Value, text: String) {
        self.fields.push((key.into(), v, text));
    }

    pub fn to_json(&self) -> String {
        let map: Map<String, Value> = self.fields.iter().map(|(k, v, _)| (k.clone(), v.clone())).collect();
        format!("{}\n", Value::Object(map))
    }

    pub fn to_text(&self) -> String {
        self.fields.iter().map(|(k, _, t)| format!("{k} = {t}\n")).collect()
    }
}
