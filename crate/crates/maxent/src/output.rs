//! CSV tables and the JSON run manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Shortest round-trip decimal form; identical across runs and platforms.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub jobs: usize,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub elapsed_seconds: f64,
}

/// Output directory plus the bookkeeping that ends up in the manifest.
#[derive(Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl RunOutput {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), inputs: Vec::new(), outputs: Vec::new(), summary: BTreeMap::new() })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256 });
        Ok(())
    }

    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        write_csv(&self.dir.join(name), header, rows)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.summary.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn finish(self, command: &str, seed: u64, jobs: usize, config: BTreeMap<String, String>, elapsed_seconds: f64) -> Result<Manifest> {
        let mut outputs = self.outputs;
        outputs.push("manifest.json".into());
        let manifest = Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            jobs,
            config,
            inputs: self.inputs,
            outputs,
            summary: self.summary,
            elapsed_seconds,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}
