//! State files.
//!
//! Three JSON shapes are accepted:
//!
//! * `{"dA": int, "dB": int, "matrix": [[re, im], ...]}`, row-major, A-major
//! * `{"pmf": [[...], ...]}`, a joint PMF embedded as a CC state
//! * `{"amplitudes": [[re, im], ...], "dA": int, "dB": int}`, a pure state

use std::path::Path;

use prmi_core::hermitian::CMatrix;
use num_complex::Complex64;
use prmi_core::states::{cc_state, pure_bipartite, Pmf};
use prmi_core::BipartiteState;
use serde_json::Value;

#[derive(Debug)]
pub enum InputError {
    Missing(String),
    Schema(String),
    Invariant(String),
}

impl InputError {
    pub fn exit_code(&self) -> i32 {
        match self {
            InputError::Missing(_) => 2,
            InputError::Schema(_) => 3,
            InputError::Invariant(_) => 4,
        }
    }
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputError::Missing(m) => write!(f, "cannot read state file: {m}"),
            InputError::Schema(m) => write!(f, "schema violation: {m}"),
            InputError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

fn schema(path: &str, what: &str) -> InputError {
    InputError::Schema(format!("{path}: {what}"))
}

fn dimension(obj: &serde_json::Map<String, Value>, key: &str) -> Result<usize, InputError> {
    let path = format!("$.{key}");
    let v = obj.get(key).ok_or_else(|| schema(&path, "missing"))?;
    match v.as_u64() {
        Some(d) if (1..=64).contains(&d) => Ok(d as usize),
        Some(_) => Err(schema(&path, "must be an integer in 1..=64")),
        None => Err(schema(&path, "must be a positive integer")),
    }
}

fn number(v: &Value, path: &str) -> Result<f64, InputError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| schema(path, "must be a finite number"))
}

fn complex_list(v: &Value, path: &str, len: usize) -> Result<Vec<Complex64>, InputError> {
    let arr = v.as_array().ok_or_else(|| schema(path, "must be an array of [re, im] pairs"))?;
    if arr.len() != len {
        return Err(schema(path, &format!("expected {len} entries, got {}", arr.len())));
    }
    arr.iter()
        .enumerate()
        .map(|(i, z)| {
            let p = format!("{path}[{i}]");
            match z.as_array().map(|a| a.as_slice()) {
                Some([re, im]) => Ok(Complex64::new(
                    number(re, &format!("{p}[0]"))?,
                    number(im, &format!("{p}[1]"))?,
                )),
                _ => Err(schema(&p, "must be a [re, im] pair")),
            }
        })
        .collect()
}

fn table(v: &Value, path: &str) -> Result<Vec<Vec<f64>>, InputError> {
    let rows = v.as_array().ok_or_else(|| schema(path, "must be a 2-D array"))?;
    if rows.is_empty() {
        return Err(schema(path, "must not be empty"));
    }
    let out = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = format!("{path}[{i}]");
            let r = r.as_array().ok_or_else(|| schema(&p, "must be an array of numbers"))?;
            r.iter()
                .enumerate()
                .map(|(j, x)| number(x, &format!("{p}[{j}]")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cols = out[0].len();
    if cols == 0 {
        return Err(schema(&format!("{path}[0]"), "must not be empty"));
    }
    if let Some(i) = out.iter().position(|r| r.len() != cols) {
        return Err(schema(&format!("{path}[{i}]"), &format!("expected {cols} entries")));
    }
    Ok(out)
}

fn reject_unknown(obj: &serde_json::Map<String, Value>, allowed: &[&str]) -> Result<(), InputError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(&format!("$.{k}"), "unknown field")),
        None => Ok(()),
    }
}

/// Builds a state from parsed JSON.
pub fn state_from_json(v: &Value) -> Result<BipartiteState, InputError> {
    let obj = v.as_object().ok_or_else(|| schema("$", "must be a JSON object"))?;
    let invariant = |e: prmi_core::Error| InputError::Invariant(e.to_string());
    let shapes = ["matrix", "pmf", "amplitudes"]
        .iter()
        .filter(|k| obj.contains_key(**k))
        .count();
    if shapes != 1 {
        return Err(schema("$", "needs exactly one of \"matrix\", \"pmf\", \"amplitudes\""));
    }
    if let Some(m) = obj.get("matrix") {
        reject_unknown(obj, &["dA", "dB", "matrix"])?;
        let (d_a, d_b) = (dimension(obj, "dA")?, dimension(obj, "dB")?);
        let n = d_a * d_b;
        let entries = complex_list(m, "$.matrix", n * n)?;
        let mat = CMatrix::from_row_slice(n, n, &entries);
        return BipartiteState::from_matrix(mat, d_a, d_b).map_err(invariant);
    }
    if let Some(p) = obj.get("pmf") {
        reject_unknown(obj, &["pmf"])?;
        let t = table(p, "$.pmf")?;
        let pmf = Pmf::joint(&t).map_err(invariant)?;
        return cc_state(&pmf).map_err(invariant);
    }
    let amps = obj.get("amplitudes").expect("one shape is present");
    reject_unknown(obj, &["dA", "dB", "amplitudes"])?;
    let (d_a, d_b) = (dimension(obj, "dA")?, dimension(obj, "dB")?);
    let a = complex_list(amps, "$.amplitudes", d_a * d_b)?;
    pure_bipartite(&a, d_a, d_b).map_err(invariant)
}

pub fn parse_input(path: &Path) -> Result<BipartiteState, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError::Missing(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| InputError::Schema(format!("$: not valid JSON ({e})")))?;
    state_from_json(&v)
}
