use crate::error::CliError;
use crate::run::OutputRecord;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Writes files into the output directory and records their hashes.
pub(crate) struct Sink {
    dir: PathBuf,
    pub(crate) records: Vec<OutputRecord>,
}

pub(crate) fn hash_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    Ok(text.into_bytes())
}

impl Sink {
    pub(crate) fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Sink { dir: dir.to_path_buf(), records: Vec::new() })
    }

    fn put(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), &bytes)?;
        self.records.push(OutputRecord {
            file: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hash_hex(&bytes),
        });
        Ok(())
    }

    pub(crate) fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let bytes = json_bytes(value)?;
        self.put(name, bytes)
    }

    pub(crate) fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let out = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(header).map_err(out)?;
        for row in rows {
            w.write_record(row).map_err(out)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        self.put(name, bytes)
    }
}

/// Shortest round-trip decimal (exponent form when very large or small);
/// infinities as `inf`.
pub(crate) fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}
