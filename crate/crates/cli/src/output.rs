//! Rendering of command results as CSV, JSON or the binary path block.

use fracsde_core::volterra::PathEnsemble;
use serde_json::{json, Map, Value};

use crate::config::Format;

/// Leading bytes of the binary path block.
pub const BINARY_MAGIC: &[u8; 5] = b"FSDE1";

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Text(String),
    Empty,
}

impl Field {
    /// Shortest decimal string that parses back to the same `f64`.
    fn csv(&self) -> String {
        match self {
            Field::Num(v) => format_f64(*v),
            Field::Text(s) => s.clone(),
            Field::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Num(v) => json!(v),
            Field::Text(s) => json!(s),
            Field::Empty => Value::Null,
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_owned())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

pub fn format_f64(v: f64) -> String {
    // Debug prints the shortest round-trip form and switches to exponent
    // notation for very large or small magnitudes
    format!("{v:?}")
}

/// Named columns; a `record` is a single row rendered as a JSON object.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
    pub record: bool,
}

impl Table {
    pub fn record(pairs: Vec<(&'static str, Field)>) -> Self {
        let (names, row) = pairs.into_iter().unzip();
        Table {
            names,
            rows: vec![row],
            record: true,
        }
    }

    pub fn columns(names: Vec<&'static str>, rows: Vec<Vec<Field>>) -> Self {
        Table {
            names,
            rows,
            record: false,
        }
    }

    fn to_json(&self) -> Value {
        let object = |row: &Vec<Field>| -> Value {
            let map: Map<String, Value> = self
                .names
                .iter()
                .zip(row)
                .map(|(n, f)| (n.to_string(), f.json()))
                .collect();
            Value::Object(map)
        };
        if self.record {
            object(&self.rows[0])
        } else {
            Value::Array(self.rows.iter().map(object).collect())
        }
    }

    fn to_csv(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.names)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Field::csv))?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// The result of one command.
#[derive(Debug, Clone)]
pub enum Report {
    /// Natural format CSV.
    Table(Table),
    /// Natural format JSON; `table` is an optional CSV view.
    Document { json: Value, table: Option<Table> },
    Ensemble(PathEnsemble),
}

impl Report {
    pub fn natural_format(&self) -> Format {
        match self {
            Report::Document { .. } => Format::Json,
            Report::Table(_) | Report::Ensemble(_) => Format::Csv,
        }
    }

    /// Encodes the report; `Err` carries a usage message for unsupported formats.
    pub fn render(&self, format: Format) -> Result<Vec<u8>, String> {
        let csv_err = |e: csv::Error| format!("CSV encoding failed: {e}");
        match (self, format) {
            (Report::Table(t), Format::Csv) => t.to_csv().map_err(csv_err),
            (Report::Table(t), Format::Json) => Ok(json_bytes(&t.to_json())),
            (Report::Document { table: Some(t), .. }, Format::Csv) => t.to_csv().map_err(csv_err),
            (Report::Document { json, .. }, Format::Json) => Ok(json_bytes(json)),
            (Report::Ensemble(e), Format::Csv) => ensemble_csv(e).map_err(csv_err),
            (Report::Ensemble(e), Format::Json) => Ok(json_bytes(&ensemble_json(e))),
            (Report::Ensemble(e), Format::Bin) => Ok(ensemble_binary(e)),
            (Report::Document { .. }, Format::Csv) => Err("this command only writes JSON".into()),
            (_, Format::Bin) => Err("binary output is only available for path ensembles".into()),
        }
    }
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializing a JSON value cannot fail");
    out.push(b'\n');
    out
}

/// Header `t,path0,path1,...`, one row per grid node.
fn ensemble_csv(e: &PathEnsemble) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend((0..e.n_paths).map(|p| format!("path{p}")));
    w.write_record(&header)?;
    for i in 0..e.width() {
        let mut row = vec![format_f64(e.grid.time(i))];
        row.extend(e.node(i).into_iter().map(format_f64));
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|err| err.into_error().into())
}

fn ensemble_json(e: &PathEnsemble) -> Value {
    json!({
        "horizon": e.grid.horizon,
        "n_steps": e.grid.n_steps,
        "seed": e.seed,
        "paths": e.paths().collect::<Vec<_>>(),
    })
}

/// `FSDE1`, then little-endian `u64` path count, `u64` nodes per path,
/// `f64` horizon, and the values path by path.
fn ensemble_binary(e: &PathEnsemble) -> Vec<u8> {
    let mut out = Vec::with_capacity(29 + 8 * e.data().len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(e.n_paths as u64).to_le_bytes());
    out.extend_from_slice(&(e.width() as u64).to_le_bytes());
    out.extend_from_slice(&e.grid.horizon.to_le_bytes());
    for v in e.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}
