//! CSV and JSON artifacts. Floats are written with 17 significant digits so
//! that they round-trip exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// `v` in scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn point(p: diskdyn::Point) -> [String; 2] {
    [num(p.x), num(p.y)]
}

/// A CSV table accumulated in memory and written in one go.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

/// Output paths `<dir>/<command>-<seed>.csv` and `.json`.
pub struct Artifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str, seed: u64) -> Self {
        Self {
            csv: dir.join(format!("{command}-{seed}.csv")),
            json: dir.join(format!("{command}-{seed}.json")),
        }
    }

    pub fn write<S: Serialize>(&self, table: &Table, summary: &S) -> Result<(), CliError> {
        if let Some(parent) = self.csv.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&self.csv, table.to_bytes()?)?;
        let mut json = serde_json::to_vec_pretty(summary).map_err(|e| CliError::Io(e.into()))?;
        json.push(b'\n');
        fs::write(&self.json, json)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456.789, 0.0, std::f64::consts::PI] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn table_bytes() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(String::from_utf8(t.to_bytes().unwrap()).unwrap(), "a,b\n1,\"x,y\"\n");
    }
}
