//! CSV tables and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Round-trip exact float: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn flag(b: bool) -> String {
    b.to_string()
}

/// A table with a header row, written as RFC-4180 CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the configuration text.
    pub config_sha256: String,
    pub artifact_version: String,
    pub seed: u64,
    pub workers: usize,
    pub wall_seconds: f64,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("manifest-{}.json", self.command));
        let text = serde_json::to_string_pretty(self).map_err(|e| crate::Error::Config(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
