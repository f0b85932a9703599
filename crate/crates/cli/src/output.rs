use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;

pub const ARTIFACT: &str = "adqc-sim";

/// Output directory for one run; every file it writes starts with the same provenance header.
#[derive(Debug, Clone)]
pub struct OutputDir {
    dir: PathBuf,
    config_sha256: String,
}

impl OutputDir {
    pub fn create(dir: &Path, config_sha256: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), config_sha256: config_sha256.to_string() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn header(&self) -> String {
        format!("# {ARTIFACT} {} config_sha256={}", adqc_core::VERSION, self.config_sha256)
    }

    fn open(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok((path, BufWriter::new(file)))
    }

    /// Delimited text: header comment, column names, then one record per row.
    pub fn csv<R, I>(&self, name: &str, columns: &[&str], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let (path, mut w) = self.open(name)?;
        writeln!(w, "{}", self.header()).map_err(|e| CliError::io(&path, e))?;
        let mut out = csv::Writer::from_writer(w);
        let wrap = |e: csv::Error| CliError::io(&path, std::io::Error::other(e));
        out.write_record(columns).map_err(wrap)?;
        for row in rows {
            out.write_record(row).map_err(wrap)?;
        }
        out.flush().map_err(|e| CliError::io(&path, e))?;
        info!("wrote {}", path.display());
        Ok(path)
    }

    /// JSON record wrapped with artifact name, version and config hash.
    pub fn json<T: Serialize>(&self, name: &str, data: &T) -> Result<PathBuf, CliError> {
        let (path, mut w) = self.open(name)?;
        let doc = json!({
            "artifact": ARTIFACT,
            "version": adqc_core::VERSION,
            "config_sha256": self.config_sha256,
            "data": data,
        });
        serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError::io(&path, e.into()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let (path, mut w) = self.open(name)?;
        writeln!(w, "{}", self.header())
            .and_then(|_| w.write_all(body.as_bytes()))
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form; identical bits always print identically.
pub fn num(x: f64) -> String {
    format!("{x}")
}
