use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};
use crate::fmt_f64;

/// A rectangular table of finite reals with a metadata block.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl CurveTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::Validation(format!(
                "row has {} entries for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some((i, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(CliError::Validation(format!("non-finite {} = {v}", self.columns[i])));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// `# key=value` metadata lines, then an RFC-4180 body.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = Vec::new();
        tripent::io::write_metadata(&mut out, &self.metadata).map_err(|e| CliError::Output(e.to_string()))?;
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(&self.columns).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|&v| fmt_f64(v))).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        let v = json!({
            "metadata": metadata_object(&self.metadata),
            "columns": self.columns,
            "rows": self.rows,
        });
        pretty(&v)
    }
}

pub fn metadata_object(meta: &[(String, String)]) -> Value {
    Value::Object(meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect::<Map<_, _>>())
}

pub fn pretty(v: &Value) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Output(e.to_string()))
}

/// A report as `key,value` rows; nested values are written as JSON.
pub fn report_csv(meta: &[(String, String)], report: &Value) -> Result<String> {
    let mut out = Vec::new();
    tripent::io::write_metadata(&mut out, meta).map_err(|e| CliError::Output(e.to_string()))?;
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(["key", "value"]).map_err(fail)?;
    if let Value::Object(m) = report {
        for (k, v) in m {
            let cell = match v {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), fmt_f64),
                other => other.to_string(),
            };
            w.write_record([k.as_str(), cell.as_str()]).map_err(fail)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}
