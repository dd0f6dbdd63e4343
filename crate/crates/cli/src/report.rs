use std::path::Path;

use dlps_core::{round_to, Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Format, OutArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Table,
    Plot,
    Summary,
}

pub struct Artifact {
    pub name: String,
    pub kind: Kind,
    pub rows: Option<usize>,
    pub content: String,
}

/// A table kept in both display (two decimals) and full-precision form so
/// it can be written as CSV or JSON.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

#[derive(Clone)]
pub enum Cell {
    Text(String),
    Int(u64),
    /// Rounded to two decimals in CSV.
    Money(f64),
    /// Written at full precision everywhere.
    Exact(f64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::Int(v.into())
    }
}

/// Two-decimal display form without a negative zero.
pub fn two_decimals(v: f64) -> String {
    let r = round_to(v, 2);
    if r == 0.0 {
        "0.00".into()
    } else {
        format!("{r:.2}")
    }
}

impl Cell {
    fn display(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Money(v) => two_decimals(*v),
            Cell::Exact(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => json!(s),
            Cell::Int(v) => json!(v),
            Cell::Money(v) | Cell::Exact(v) => json!(v),
        }
    }
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("write to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::display)).expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj = self.header.iter().zip(row).map(|(h, c)| (h.to_string(), c.json())).collect();
                Value::Object(obj)
            })
            .collect();
        pretty(&rows)
    }
}

/// Writes to stdout; a closed pipe is not an error.
pub fn stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
        _ => Ok(()),
    }
}

pub fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

pub struct Report {
    command: &'static str,
    dataset: String,
    artifacts: Vec<Artifact>,
}

impl Report {
    pub fn new(command: &'static str, dataset: &str) -> Self {
        Report {
            command,
            dataset: dataset.to_string(),
            artifacts: Vec::new(),
        }
    }

    /// Adds a table using `--format` for its encoding. The first table added
    /// is the one printed when no output directory is given.
    pub fn table(&mut self, stem: &str, kind: Kind, table: &Table, format: Format) {
        let (ext, content) = match format {
            Format::Csv => ("csv", table.to_csv()),
            Format::Json => ("json", table.to_json()),
        };
        self.artifacts.push(Artifact {
            name: format!("{stem}.{ext}"),
            kind,
            rows: Some(table.len()),
            content,
        });
    }

    pub fn summary(&mut self, value: &impl Serialize) {
        self.artifacts.push(Artifact {
            name: "summary.json".into(),
            kind: Kind::Summary,
            rows: None,
            content: pretty(value),
        });
    }

    fn manifest(&self) -> String {
        let files: Vec<Value> = self
            .artifacts
            .iter()
            .map(|a| {
                let mut entry = json!({ "name": a.name, "kind": a.kind });
                if let Some(rows) = a.rows {
                    entry["rows"] = json!(rows);
                }
                entry
            })
            .collect();
        pretty(&json!({ "command": self.command, "dataset": self.dataset, "files": files }))
    }

    /// Writes every artifact plus `manifest.json` into `--out`, or prints the
    /// first artifact when no directory was given. `headline` goes to stdout
    /// in the first case.
    pub fn emit(self, out: &OutArgs, headline: &str) -> Result<()> {
        let Some(dir) = &out.out else {
            return match self.artifacts.first() {
                Some(first) => stdout(&first.content),
                None => Ok(()),
            };
        };
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        for a in &self.artifacts {
            write(&dir.join(&a.name), &a.content)?;
        }
        write(&dir.join("manifest.json"), &self.manifest())?;
        stdout(&format!("{headline}wrote {} files to {}\n", self.artifacts.len() + 1, dir.display()))
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| io_error(path, e))
}
