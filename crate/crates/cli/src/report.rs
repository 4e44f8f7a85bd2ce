//! Output assembly: one ordered report, three renderings.
//!
//! JSON is the canonical machine format (numbers round-trip bit-exactly
//! through serde_json's shortest representation); CSV carries 17 significant
//! digits for plotting; `table` is human-aligned fixed width.

use std::fmt::Write as _;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Ordered scalar fields plus an optional row table.
#[derive(Debug, Default)]
pub struct Report {
    scalars: Vec<(String, Value)>,
    table: Option<(Vec<String>, Vec<Vec<Value>>)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report::default();
        r.push_str("command", command);
        r
    }

    pub fn push(&mut self, key: &str, value: Value) {
        self.scalars.push((key.to_owned(), value));
    }

    pub fn push_str(&mut self, key: &str, value: &str) {
        self.push(key, Value::String(value.to_owned()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, json_number(value));
    }

    pub fn push_bool(&mut self, key: &str, value: bool) {
        self.push(key, Value::Bool(value));
    }

    pub fn set_table(&mut self, headers: Vec<String>, rows: Vec<Vec<Value>>) {
        self.table = Some((headers, rows));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
            Format::Table => self.render_table(),
        }
    }

    fn render_json(&self) -> String {
        let mut map = serde_json::Map::new();
        for (k, v) in &self.scalars {
            map.insert(k.clone(), v.clone());
        }
        if let Some((headers, rows)) = &self.table {
            let rows: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (h, v) in headers.iter().zip(row) {
                        obj.insert(h.clone(), v.clone());
                    }
                    Value::Object(obj)
                })
                .collect();
            map.insert("rows".to_owned(), Value::Array(rows));
        }
        let mut out = serde_json::to_string_pretty(&Value::Object(map)).expect("valid json");
        out.push('\n');
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        if let Some((headers, rows)) = &self.table {
            let _ = writeln!(out, "{}", headers.join(","));
            for row in rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        } else {
            let _ = writeln!(out, "key,value");
            for (k, v) in &self.scalars {
                let _ = writeln!(out, "{k},{}", csv_cell(v));
            }
        }
        out
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        let width = self.scalars.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.scalars {
            let _ = writeln!(out, "{k:<width$}  {}", plain_cell(v));
        }
        if let Some((headers, rows)) = &self.table {
            if !self.scalars.is_empty() {
                out.push('\n');
            }
            let mut cols: Vec<usize> = headers.iter().map(|h| h.len()).collect();
            let rendered: Vec<Vec<String>> = rows
                .iter()
                .map(|row| row.iter().map(plain_cell).collect())
                .collect();
            for row in &rendered {
                for (i, cell) in row.iter().enumerate() {
                    cols[i] = cols[i].max(cell.len());
                }
            }
            for (i, h) in headers.iter().enumerate() {
                let _ = write!(out, "{h:>w$}  ", w = cols[i]);
            }
            out.push('\n');
            for row in &rendered {
                for (i, cell) in row.iter().enumerate() {
                    let _ = write!(out, "{cell:>w$}  ", w = cols[i]);
                }
                out.push('\n');
            }
        }
        out
    }
}

/// `f64` into a JSON number (finite values only reach reports).
pub fn json_number(value: f64) -> Value {
    serde_json::Number::from_f64(value)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(value.to_string()))
}

fn csv_cell(v: &Value) -> String {
    match v {
        // 17 significant digits: enough to reconstruct the f64 bit pattern
        Value::Number(n) => match n.as_f64() {
            Some(x) => format!("{x:.16e}"),
            None => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn plain_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
