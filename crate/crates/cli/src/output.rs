//! Output directory: `report.csv`, `plotdata/*.dat`, `fields/*.bin`.
//!
//! One process owns a directory at a time through `.lock`, created with
//! `create_new` and removed on drop. All writes happen on the main thread.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use elastowave::spectral_grid::write_field;
use elastowave::VectorField;

use crate::Failure;

const LOCK: &str = ".lock";

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    lock: PathBuf,
}

impl OutDir {
    pub fn open(root: &Path) -> Result<Self, Failure> {
        for sub in ["", "plotdata", "fields"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        }
        let lock = root.join(LOCK);
        OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock)
            .and_then(|mut f| writeln!(f, "{}", std::process::id()))
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::AlreadyExists => {
                    Failure::Io(format!("{} is locked by another run ({})", root.display(), lock.display()))
                }
                _ => io_err(&lock, e),
            })?;
        Ok(Self { root: root.to_path_buf(), lock })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn report(&self) -> Result<Report, Failure> {
        let path = self.root.join("report.csv");
        let writer = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        Ok(Report { path, writer })
    }

    /// Whitespace-separated columns with a `#` header line, for gnuplot.
    pub fn plotdata(&self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), Failure> {
        let path = self.root.join("plotdata").join(name);
        let write = || -> std::io::Result<()> {
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "# {}", columns.join(" "))?;
            for row in rows {
                let line: Vec<String> = row.iter().map(|x| num(*x)).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
            w.flush()
        };
        write().map_err(|e| io_err(&path, e))
    }

    pub fn field(&self, name: &str, field: &VectorField) -> Result<PathBuf, Failure> {
        let path = self.root.join("fields").join(name);
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        write_field(BufWriter::new(file), field).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}

impl Drop for OutDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

pub struct Report {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl Report {
    pub fn row<I, S>(&mut self, fields: I) -> Result<(), Failure>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| io_err(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        self.writer.flush().map_err(|e| io_err(&self.path, e))
    }
}

/// Shortest round-trip decimal; never locale dependent.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// `t` or `s` formatted for file names: `0.25` becomes `0.25`, `-1` stays `-1`.
pub fn tag(x: f64) -> String {
    format!("{x}")
}
