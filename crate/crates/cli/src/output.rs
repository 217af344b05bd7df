use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::Format;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) => x.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(*x),
            Cell::Num(x) => Value::from(x.to_string()),
            Cell::Int(n) => Value::from(*n),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Cell {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Cell {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Cell {
        Cell::Bool(b)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(meta: Vec<(String, String)>, columns: Vec<String>) -> Table {
        Table { meta, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV with a leading `# key=value ...` metadata line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let meta: Vec<String> = self.meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(w, "# {}\r\n", meta.join(" "))?;
        let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        csv.write_record(&self.columns)?;
        for row in &self.rows {
            csv.write_record(row.iter().map(Cell::csv))?;
        }
        csv.flush()
    }

    pub fn to_json(&self) -> Value {
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), Value::from(v.as_str()))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect()))
            .collect();
        json!({ "meta": meta, "columns": self.columns, "rows": rows })
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> io::Result<()> {
        let sink: Box<dyn Write> = match out {
            Some(p) => Box::new(File::create(p)?),
            None => Box::new(io::stdout().lock()),
        };
        let mut sink = BufWriter::new(sink);
        match format {
            Format::Csv => self.write_csv(&mut sink)?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut sink, &self.to_json())?;
                writeln!(sink)?;
            }
        }
        sink.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits_and_quotes() {
        let mut t = Table::new(vec![("seed".into(), "3".into())], vec!["x".into(), "label".into()]);
        t.push(vec![Cell::Num(0.1), Cell::Text("a,b".into())]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# seed=3\r\nx,label\r\n1.0000000000000001e-1,\"a,b\"\r\n");
    }

    #[test]
    fn json_mirrors_rows() {
        let mut t = Table::new(vec![], vec!["x".into(), "ok".into()]);
        t.push(vec![Cell::Num(f64::INFINITY), Cell::Bool(true)]);
        let v = t.to_json();
        assert_eq!(v["rows"][0]["x"], "inf");
        assert_eq!(v["rows"][0]["ok"], true);
    }
}
