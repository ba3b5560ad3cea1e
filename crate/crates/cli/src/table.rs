//! CSV result tables with a commented provenance header.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Formats a float with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// What a table was produced from. Written as `# key value` lines.
pub struct Provenance {
    pub command: &'static str,
    pub config_json: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new<C: Serialize>(command: &'static str, config: &C, seed: u64) -> Result<Self> {
        Ok(Self { command, config_json: serde_json::to_string(config)?, seed })
    }

    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.config_json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn header(&self) -> String {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        format!(
            "# tpuzzle {} {}\n# config_sha256 {}\n# seed {}\n# created_unix {created}\n# config {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config_hash(),
            self.seed,
            self.config_json
        )
    }
}

pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn write(&self, path: &Path, prov: &Provenance) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let mut file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        file.write_all(prov.header().as_bytes())?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        eprintln!("wrote {} ({} rows)", path.display(), self.rows.len());
        Ok(())
    }
}

/// A table read back from disk, header comments skipped.
pub struct Loaded {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Loaded {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let columns = r.headers()?.iter().map(str::to_owned).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_owned).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()?;
        Ok(Self { columns, rows })
    }

    pub fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn has(&self, names: &[&str]) -> bool {
        names.iter().all(|n| self.col(n).is_some())
    }

    /// Parses column `name` of every row as `f64`.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.col(name).with_context(|| format!("missing column {name}"))?;
        self.rows
            .iter()
            .map(|r| r[j].parse::<f64>().with_context(|| format!("column {name}: bad number '{}'", r[j])))
            .collect()
    }

    pub fn strings(&self, name: &str) -> Result<Vec<String>> {
        let j = self.col(name).with_context(|| format!("missing column {name}"))?;
        Ok(self.rows.iter().map(|r| r[j].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let x = 0.1f64 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn round_trip_skips_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), num(0.5)]);
        let prov = Provenance::new("test", &serde_json::json!({"x": 1}), 3).unwrap();
        t.write(&path, &prov).unwrap();
        let back = Loaded::read(&path).unwrap();
        assert_eq!(back.columns, vec!["a", "b"]);
        assert_eq!(back.floats("b").unwrap(), vec![0.5]);
    }
}
