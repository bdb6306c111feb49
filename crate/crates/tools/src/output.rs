//! Artifact writers. Every file is written to a temporary sibling and
//! renamed into place, so an interrupted run leaves no partial file.

use std::io::Write;
use std::path::{Path, PathBuf};

use immigration_core::renewal::StationaryWindow;
use immigration_core::stats::RowMatrix;
use serde::Serialize;

use crate::error::CliError;

/// Fixed 17-significant-digit rendering, independent of locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shortest round-trip rendering, used in column headers.
pub fn fmt_label(x: f64) -> String {
    format!("{x}")
}

pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// File names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.root.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root).map_err(|e| CliError::io(&self.root, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(&target, e))?;
        tmp.as_file().sync_all().map_err(|e| CliError::io(&target, e))?;
        tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
        log::info!("wrote {}", target.display());
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    pub fn write_csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let target = self.root.join(name);
        let to_io = |e: csv::Error| CliError::io(&target, e.into());
        w.write_record(header).map_err(to_io)?;
        for r in rows {
            w.write_record(r).map_err(to_io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(&target, e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    /// Replicates as rows, one `u=<value>` column per grid point.
    pub fn write_matrix(&mut self, name: &str, u_grid: &[f64], m: &RowMatrix) -> Result<(), CliError> {
        let header: Vec<String> = u_grid.iter().map(|u| format!("u={}", fmt_label(*u))).collect();
        let rows: Vec<Vec<String>> = m.iter_rows().map(|r| r.iter().map(|v| fmt_f64(*v)).collect()).collect();
        self.write_csv(name, &header, &rows)
    }

    /// Stored window points as `index,point`.
    pub fn write_window(&mut self, name: &str, w: &StationaryWindow) -> Result<(), CliError> {
        let header = vec!["index".to_string(), "point".to_string()];
        let rows: Vec<Vec<String>> = w.points().map(|(k, t)| vec![k.to_string(), fmt_f64(t)]).collect();
        self.write_csv(name, &header, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width_scientific() {
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn matrix_csv_and_atomic_replace() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        let m = RowMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.5]]).unwrap();
        out.write_matrix("m.csv", &[0.0, 1.5], &m).unwrap();
        out.write_matrix("m.csv", &[0.0, 1.5], &m).unwrap();
        let text = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
        assert_eq!(
            text,
            "u=0,u=1.5\n1.0000000000000000e0,2.0000000000000000e0\n3.0000000000000000e0,4.5000000000000000e0\n"
        );
        let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }
}
