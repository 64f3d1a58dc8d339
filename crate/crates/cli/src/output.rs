//! Atomic file output and CSV tables.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Formats a float with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory CSV table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&str]) -> Self {
        Self { file: file.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("records serialize");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Writes every table under `dir`, returning the paths.
pub fn write_tables(dir: &Path, tables: &[Table]) -> CliResult<Vec<PathBuf>> {
    tables
        .iter()
        .map(|t| {
            let p = dir.join(&t.file);
            write_atomic(&p, &t.to_bytes())?;
            Ok(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, std::f64::consts::PI] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn table_bytes() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.to_bytes(), b"a,b\n1,2\n");
    }
}
