use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::config::Format;
use crate::error::CliError;

/// 17 significant digits, round-trip exact.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self::from_header(header.iter().map(|s| s.to_string()).collect())
    }

    pub fn from_header(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, CliError> {
        let mut rd = csv::Reader::from_reader(bytes);
        let header = rd.headers()?.iter().map(String::from).collect();
        let mut t = Self::from_header(header);
        for rec in rd.records() {
            t.rows.push(rec?.iter().map(String::from).collect());
        }
        Ok(t)
    }

    fn write<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// A command result in both shapes; the format picks one.
#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    pub table: Table,
}

impl Output {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.table.write(&mut buf)?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut buf, &self.json)?;
                buf.push(b'\n');
            }
        }
        Ok(buf)
    }

    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<(), CliError> {
        let bytes = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, bytes)?,
            None => std::io::stdout().lock().write_all(&bytes)?,
        }
        Ok(())
    }

    pub fn write_table(&self, path: &Path) -> Result<(), CliError> {
        let f = std::fs::File::create(path)?;
        self.table.write(std::io::BufWriter::new(f))
    }
}
