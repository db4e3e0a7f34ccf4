use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::CliResult;

/// Bumped whenever a report layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits kept for every float in emitted output.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rows with a fixed column order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Builds a table from serializable records; columns follow the field
    /// order of the first record.
    pub fn from_records<T: Serialize>(columns: &[&str], records: &[T]) -> CliResult<Self> {
        let mut table = Self::new(columns);
        for r in records {
            let value = serde_json::to_value(r)?;
            let obj = value.as_object().expect("records serialize as objects");
            table.push(
                columns
                    .iter()
                    .map(|c| obj.get(*c).cloned().unwrap_or(Value::Null))
                    .collect(),
            );
        }
        Ok(table)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub summary: Value,
    pub table: Table,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

/// Rounds to [`SIGNIFICANT_DIGITS`]; non-finite values have no JSON form and
/// become null.
pub fn round_float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => round_float(n.as_f64().expect("f64")),
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, normalize(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Renders a report. JSON carries the whole report; CSV carries the table
/// (a header-only file when there are no rows).
pub fn emit_table(report: &Report, format: Format) -> CliResult<String> {
    let value = normalize(serde_json::to_value(report)?);
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.table.columns)?;
            for row in value["table"]["rows"].as_array().expect("rows array") {
                let cells: Vec<String> = row
                    .as_array()
                    .expect("row array")
                    .iter()
                    .map(csv_cell)
                    .collect();
                w.write_record(&cells)?;
            }
            let bytes = w.into_inner().map_err(|e| e.into_error())?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn report(table: Table) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            version: "v0",
            command: "test",
            config: json!({}),
            summary: json!({"x": 0.1 + 0.2, "inf": f64::INFINITY}),
            table,
            runtime_seconds: None,
        }
    }

    #[test]
    fn floats_keep_twelve_digits() {
        assert_eq!(round_float(0.1 + 0.2), json!(0.3));
        assert_eq!(round_float(1.0 / 3.0), json!(0.333333333333));
        assert_eq!(round_float(2.0e-20 / 3.0), json!(6.66666666667e-21));
        assert_eq!(round_float(f64::NAN), Value::Null);
    }

    #[test]
    fn empty_table_gives_header_only_csv() {
        let out = emit_table(&report(Table::new(&["a", "b"])), Format::Csv).unwrap();
        assert_eq!(out, "a,b\n");
    }

    #[test]
    fn csv_rows_and_json_rounding() {
        let mut t = Table::new(&["n", "ratio", "label"]);
        t.push(vec![json!(5), json!(1.0 / 7.0), json!("x,y")]);
        t.push(vec![json!(6), Value::Null, json!("z")]);
        let r = report(t);
        assert_eq!(
            emit_table(&r, Format::Csv).unwrap(),
            "n,ratio,label\n5,0.142857142857,\"x,y\"\n6,,z\n"
        );
        let j = emit_table(&r, Format::Json).unwrap();
        assert!(j.contains("\"x\": 0.3"));
        assert!(j.contains("\"inf\": null"));
    }
}
