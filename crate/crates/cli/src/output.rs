//! Output directory handling, CSV formatting and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anatomy_core::GateConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// CSV text with LF endings and shortest round-trip float formatting.
#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        let mut first = true;
        for v in values {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(&format_float(*v));
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        // fold -0 into 0
        "0".to_string()
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub arguments: Vec<String>,
    pub config: GateConfig,
    pub out_dir: String,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<FileEntry>,
    pub wall_clock_seconds: f64,
}

/// Collects the files of one run and writes them, plus the manifest.
pub struct OutputSet {
    dir: PathBuf,
    subcommand: String,
    outputs: Vec<FileEntry>,
    started: Instant,
}

impl OutputSet {
    pub fn create(dir: &Path, subcommand: &str) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            subcommand: subcommand.to_string(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.outputs.push(FileEntry { name: name.to_string(), sha256: sha256_hex(contents), bytes: contents.len() });
        Ok(path)
    }

    pub fn finish(self, config: &GateConfig, arguments: Vec<String>, inputs: Vec<InputFile>) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            tool: "anatomy",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand.clone(),
            arguments,
            config: config.clone(),
            out_dir: self.dir.display().to_string(),
            inputs,
            outputs: self.outputs,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = self.dir.join(format!("manifest_{}.json", self.subcommand));
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, json).map_err(|source| CliError::Io { path, source })?;
        Ok(manifest)
    }
}
