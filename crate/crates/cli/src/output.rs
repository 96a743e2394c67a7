//! Tables, schema files and JSON reports.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::config::Format;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub description: &'static str,
}

pub const fn col(name: &'static str, kind: &'static str, description: &'static str) -> Column {
    Column { name, kind, description }
}

/// One CSV file: header from `columns`, one string per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[Column]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name))?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner()?)
    }

    pub fn schema(&self) -> serde_json::Value {
        serde_json::json!({
            "file": format!("{}.csv", self.name),
            "delimiter": ",",
            "columns": self.columns,
        })
    }
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn modes(m: &[usize]) -> String {
    m.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(";")
}

/// Collects the files of one run, in write order.
#[derive(Debug)]
pub struct OutputWriter {
    dir: PathBuf,
    formats: Vec<Format>,
    written: Vec<PathBuf>,
}

impl OutputWriter {
    pub fn create(dir: &Path, formats: &[Format]) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            formats: formats.to_vec(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        let rel = PathBuf::from(name);
        let path = self.dir.join(&rel);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(rel.clone());
        Ok(rel)
    }

    /// CSV plus its schema; skipped when CSV output is off.
    pub fn table(&mut self, t: &Table) -> anyhow::Result<Vec<PathBuf>> {
        if !self.formats.contains(&Format::Csv) {
            return Ok(vec![]);
        }
        let csv = self.write(&format!("{}.csv", t.name), &t.to_csv()?)?;
        let schema = serde_json::to_vec_pretty(&t.schema())?;
        let s = self.write(&format!("{}.schema.json", t.name), &schema)?;
        Ok(vec![csv, s])
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<Vec<PathBuf>> {
        if !self.formats.contains(&Format::Json) {
            return Ok(vec![]);
        }
        let bytes = serde_json::to_vec_pretty(value)?;
        Ok(vec![self.write(&format!("{name}.json"), &bytes)?])
    }

    /// Always written, whatever the formats.
    pub fn raw(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        self.write(name, bytes)
    }
}
