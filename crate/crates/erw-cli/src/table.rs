//! Result tables and their two serializations.
//!
//! Output is a pure function of the experiment config: metadata carries the
//! config echo and the crate version, never wall-clock times or worker
//! counts, so equal configs produce byte-identical files.
//!
//! CSV (RFC 4180 quoting) starts with `# key=value` metadata lines; JSON
//! nests the same metadata next to the rows. Floats print through Rust's
//! shortest round-trip formatting, so 0.625 stays "0.625" in both formats.

use serde_json::{json, Map, Value};

/// One table cell. `Null` renders as an empty CSV field / JSON null.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    UInt(u64),
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Null,
}

impl Cell {
    pub fn opt_u64(v: Option<u64>) -> Cell {
        v.map_or(Cell::Null, Cell::UInt)
    }

    pub fn opt_f64(v: Option<f64>) -> Cell {
        v.map_or(Cell::Null, Cell::Float)
    }

    fn csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Str(s) => csv_escape(s),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::UInt(v) => json!(v),
            Cell::Int(v) => json!(v),
            // non-finite floats have no JSON representation
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Str(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Null => Value::Null,
        }
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Named columns, rows of cells, and the metadata block.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Flat config echo (sorted by key inside serde_json's map).
    pub config: Map<String, Value>,
    pub version: &'static str,
    /// Experiment-level aggregates, in insertion order.
    pub summary: Vec<(&'static str, Cell)>,
}

impl ResultTable {
    pub fn new(columns: Vec<&'static str>, config: Map<String, Value>) -> Self {
        ResultTable {
            columns,
            rows: Vec::new(),
            config,
            version: env!("CARGO_PKG_VERSION"),
            summary: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_summary(&mut self, key: &'static str, value: Cell) {
        self.summary.push((key, value));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.config {
            out.push_str(&format!("# config.{key}={}\n", meta_value(value)));
        }
        out.push_str(&format!("# version={}\n", self.version));
        for (key, cell) in &self.summary {
            out.push_str(&format!("# summary.{key}={}\n", cell.csv()));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut metadata = Map::new();
        metadata.insert("config".into(), Value::Object(self.config.clone()));
        metadata.insert("version".into(), json!(self.version));
        if !self.summary.is_empty() {
            let mut summary = Map::new();
            for (key, cell) in &self.summary {
                summary.insert((*key).into(), cell.json());
            }
            metadata.insert("summary".into(), Value::Object(summary));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert((*col).into(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "metadata": Value::Object(metadata),
            "columns": self.columns,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("table serialization");
        text.push('\n');
        text
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Metadata values print unquoted strings; everything else is plain JSON.
fn meta_value(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}
