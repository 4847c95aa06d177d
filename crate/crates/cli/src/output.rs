use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
}

/// Rows of one command, written as the CSV body or `results.rows` in JSON.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub results: Map<String, Value>,
    pub table: Table,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable"),
        );
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.checks.push(Check {
            name: name.into(),
            ok,
        });
    }

    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn write(
        &self,
        config: &Value,
        format: Format,
        out: &mut dyn Write,
    ) -> std::io::Result<()> {
        match format {
            Format::Json => {
                let rows: Vec<Value> = self
                    .table
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> = self
                            .table
                            .columns
                            .iter()
                            .map(|c| c.to_string())
                            .zip(r.iter().cloned())
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut results = self.results.clone();
                results.insert("rows".into(), Value::Array(rows));
                let doc = json!({ "config": config, "results": results, "checks": self.checks });
                serde_json::to_writer_pretty(&mut *out, &doc)?;
                writeln!(out)
            }
            Format::Csv => {
                writeln!(out, "# config: {config}")?;
                writeln!(out, "# results: {}", Value::Object(self.results.clone()))?;
                for c in &self.checks {
                    writeln!(
                        out,
                        "# check {}: {}",
                        c.name,
                        if c.ok { "pass" } else { "FAIL" }
                    )?;
                }
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.table.columns)?;
                for r in &self.table.rows {
                    w.write_record(r.iter().map(cell))?;
                }
                w.flush()
            }
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::default();
        r.result("n0", 2);
        r.table = Table::new(&["n", "ratio"]);
        r.table.push(vec![json!(3), json!(0.5)]);
        r.table.push(vec![json!(4), Value::Null]);
        r.check("bound", true);
        r
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample()
            .write(&json!({"command": "x"}), Format::Csv, &mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# config: {\"command\":\"x\"}\n# results: {\"n0\":2}\n# check bound: pass\nn,ratio\n3,0.5\n4,\n"
        );
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        sample().write(&json!({}), Format::Json, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["results"]["rows"][1]["ratio"], Value::Null);
        assert_eq!(v["checks"][0]["ok"], Value::Bool(true));
    }
}
