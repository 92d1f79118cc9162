//! Artifact assembly. Everything is rendered to bytes first so that a failed command
//! leaves no partial output, and so tests can compare runs without touching disk.

use crate::error::CliError;
use serde::Serialize;
use std::fs;
use std::path::Path;

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// RFC 4180 table built row by row.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Table { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("writing to memory");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("writing to memory")
    }
}

#[derive(Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable output");
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.files.push((name.to_string(), table.into_bytes()));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Writes the primary files in order.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
pub struct Meta<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub created_unix_seconds: u64,
    pub elapsed_seconds: f64,
    pub files: Vec<&'a str>,
}

/// Sidecar with everything that legitimately changes between runs.
pub fn write_meta(dir: &Path, meta: &Meta) -> Result<(), CliError> {
    let path = dir.join("meta.json");
    let mut bytes = serde_json::to_vec_pretty(meta).expect("serializable output");
    bytes.push(b'\n');
    fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}
