//! Report encoding. Reals are written as decimal strings with 17 significant
//! digits in both JSON and CSV, so the two encodings carry identical values.

use serde_json::{Map, Value};

pub fn real_string(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn real(x: f64) -> Value {
    Value::String(real_string(x))
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| real(*x)).collect())
}

pub fn opt_real(x: Option<f64>) -> Value {
    x.map_or(Value::Null, real)
}

/// Replaces every floating-point number in `v` by its decimal string.
pub fn stringify_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => real(n.as_f64().expect("f64 number")),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_floats(v))).collect()),
        other => other,
    }
}

/// Builds a JSON object from key/value pairs; keys come out sorted.
pub fn object<const N: usize>(pairs: [(&str, Value); N]) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: Value,
    pub results: Vec<Value>,
    pub table: Table,
}

pub fn suite_versions() -> Value {
    Value::Object(
        conestab::verify::SUITE_VERSIONS
            .iter()
            .map(|(name, version)| (name.to_string(), Value::String(version.to_string())))
            .collect(),
    )
}

pub fn to_json(report: &Report) -> String {
    let doc = object([
        ("config", report.config.clone()),
        ("results", Value::Array(report.results.clone())),
        ("suite_versions", suite_versions()),
    ]);
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn to_csv(table: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
}
