//! Tabular output shared by the library and the command-line front end.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A named table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// Writes `<dir>/<name>.csv` with LF line endings and returns the path.
    pub fn write_csv(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(file);
        let csv_err = |e: csv::Error| Error::io(&path, std::io::Error::other(e));
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let mut inner = w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
        inner.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_lf_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec![fmt_f(0.1), fmt_opt(None)]);
        let path = t.write_csv(dir.path()).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "a,b\n0.1,\n");
    }

    #[test]
    fn float_format_round_trips() {
        for x in [1.0, 1e-300, 7.198293, -0.0, 123456789.125] {
            assert_eq!(fmt_f(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f(f64::NAN), "nan");
    }
}
