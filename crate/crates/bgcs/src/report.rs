//! Reports: JSON is canonical, CSV is a flat projection of the same records.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::RunError;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub command: String,
    /// True iff every record is within tolerance.
    pub pass: bool,
    pub records: Vec<Value>,
}

/// One numerical check.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckRecord {
    pub check: String,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CheckRecord {
    /// Deterministic identity check passing when `rel_err <= tolerance`.
    pub fn identity(check: &str, params: Value, lhs: f64, rhs: f64, rel_err: f64, tolerance: f64) -> Self {
        CheckRecord {
            check: check.into(),
            params,
            lhs: Some(lhs),
            rhs: Some(rhs),
            rel_err: Some(rel_err),
            z_score: None,
            max_deviation: None,
            tolerance,
            pass: rel_err <= tolerance,
            budget: None,
            seed: None,
        }
    }

    /// Monte Carlo check passing when `z_score <= sigmas`.
    #[allow(clippy::too_many_arguments)]
    pub fn statistical(check: &str, params: Value, lhs: f64, rhs: f64, z: f64, sigmas: f64, budget: u64, seed: u64) -> Self {
        CheckRecord {
            check: check.into(),
            params,
            lhs: Some(lhs),
            rhs: Some(rhs),
            rel_err: None,
            z_score: Some(z),
            max_deviation: None,
            tolerance: sigmas,
            pass: z <= sigmas,
            budget: Some(budget),
            seed: Some(seed),
        }
    }
}

/// Result of a trace run.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TraceRecord {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub c: Vec<f64>,
    pub mode: String,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_im: Option<f64>,
    pub error: f64,
    pub reference: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A single evaluated quantity.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ValueRecord {
    pub quantity: String,
    pub params: Value,
    pub re: f64,
    pub im: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shells: Option<usize>,
}

/// One draw from the measure.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SampleRecord {
    pub index: u64,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
}

pub fn pass_of(v: &Value) -> bool {
    v.get("pass").and_then(Value::as_bool).unwrap_or(true)
}

impl Report {
    pub fn new<T: Serialize>(command: &str, records: &[T]) -> Result<Self, RunError> {
        let records: Vec<Value> = records.iter().map(serde_json::to_value).collect::<Result<_, _>>()?;
        let pass = records.iter().all(pass_of);
        Ok(Report { command: command.into(), pass, records })
    }

    pub fn to_json(&self) -> Result<String, RunError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per record; nested keys are joined with `.` and array
    /// elements by index, so `params.n.0`, `r.1` and so on. The header is
    /// the union of keys in first-seen order.
    pub fn to_csv(&self) -> Result<String, RunError> {
        let rows: Vec<Vec<(String, String)>> = self
            .records
            .iter()
            .map(|r| {
                let mut out = Vec::new();
                flatten("", r, &mut out);
                out
            })
            .collect();
        let mut header: Vec<String> = Vec::new();
        for row in &rows {
            for (k, _) in row {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)?;
        for row in &rows {
            w.write_record(header.iter().map(|h| {
                row.iter().find(|(k, _)| k == h).map(|(_, v)| v.as_str()).unwrap_or("")
            }))?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write<W: Write>(&self, format: crate::OutputFormat, mut out: W) -> Result<(), RunError> {
        let text = match format {
            crate::OutputFormat::Json => self.to_json()?,
            crate::OutputFormat::Csv => self.to_csv()?,
        };
        out.write_all(text.as_bytes())?;
        Ok(())
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => flatten_map(prefix, m, out),
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn flatten_map(prefix: &str, m: &Map<String, Value>, out: &mut Vec<(String, String)>) {
    for (k, v) in m {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        flatten(&key, v, out);
    }
}
