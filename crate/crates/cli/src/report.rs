use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// One run's output: the resolved configuration, a table and a summary.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Value,
    /// False when the run's property check failed (exit status 1).
    pub passed: bool,
}

impl Report {
    pub fn new(command: &'static str, config: Value, columns: &[&'static str]) -> Self {
        Report {
            command,
            config,
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Value::Null,
            passed: true,
        }
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Csv => {
                let mut s = String::new();
                writeln!(s, "# command: {}", self.command).unwrap();
                writeln!(s, "# config: {}", self.config).unwrap();
                writeln!(s, "# summary: {}", self.summary).unwrap();
                writeln!(s, "# passed: {}", self.passed).unwrap();
                writeln!(s, "{}", self.columns.join(",")).unwrap();
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(csv_cell).collect();
                    writeln!(s, "{}", cells.join(",")).unwrap();
                }
                s
            }
        }
    }
}

fn csv_cell(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_quotes_embedded_commas() {
        let mut r = Report::new("x", json!({"a": 1}), &["v", "n"]);
        r.row(vec![json!("(1,2)"), json!(3)]);
        let out = r.render(Format::Csv);
        assert!(out.contains("\"(1,2)\",3\n"));
        assert!(out.starts_with("# command: x\n# config: {\"a\":1}\n"));
    }
}
