//! Output directory, CSV/JSON writers and the run manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub use kinld::io::fmt_float as num;

/// Outcome of one invariant check; failing `hard` checks make the run exit with status 2.
#[derive(Debug, Clone, Serialize)]
pub struct Invariant {
    pub name: String,
    pub hard: bool,
    pub passed: bool,
    pub detail: String,
}

/// A file written by the run and the quantity it holds.
#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub quantity: String,
    pub rows: Option<usize>,
}

#[derive(Serialize)]
struct Manifest<'a, C, S> {
    tool: &'static str,
    versions: BTreeMap<&'static str, &'static str>,
    subcommand: &'a str,
    config: &'a C,
    config_sha256: String,
    outputs: &'a [OutputFile],
    invariants: &'a [Invariant],
    summary: &'a S,
}

/// Collects outputs and invariant results of one subcommand run.
pub struct Run {
    dir: PathBuf,
    subcommand: &'static str,
    outputs: Vec<OutputFile>,
    invariants: Vec<Invariant>,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

impl Run {
    pub fn new(dir: &Path, subcommand: &'static str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Run { dir: dir.to_path_buf(), subcommand, outputs: Vec::new(), invariants: Vec::new() })
    }

    pub fn csv<I>(&mut self, name: &str, quantity: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.dir.join(name);
        let mut out = create(&path)?;
        let io = |e| CliError::io(&path, e);
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        let mut count = 0;
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            writeln!(out, "{}", row.join(",")).map_err(io)?;
            count += 1;
        }
        out.flush().map_err(io)?;
        self.outputs.push(OutputFile { file: name.to_string(), quantity: quantity.to_string(), rows: Some(count) });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, quantity: &str, value: &T) -> Result<(), CliError> {
        write_json(&self.dir.join(name), value)?;
        self.outputs.push(OutputFile { file: name.to_string(), quantity: quantity.to_string(), rows: None });
        Ok(())
    }

    pub fn check(&mut self, name: &str, hard: bool, passed: bool, detail: impl Into<String>) {
        let detail = detail.into();
        if !passed {
            let level = if hard { log::Level::Error } else { log::Level::Warn };
            log::log!(level, "{}: invariant `{name}` failed: {detail}", self.subcommand);
        }
        self.invariants.push(Invariant { name: name.to_string(), hard, passed, detail });
    }

    /// Writes `<subcommand>.manifest.json`; fails with an invariant error if a hard check failed.
    pub fn finish<C: Serialize, S: Serialize>(self, config: &C, summary: &S) -> Result<(), CliError> {
        let manifest = Manifest {
            tool: "kinld",
            versions: BTreeMap::from([("kinld", kinld::VERSION), ("kinld-cli", env!("CARGO_PKG_VERSION"))]),
            subcommand: self.subcommand,
            config,
            config_sha256: config_hash(self.subcommand, config)?,
            outputs: &self.outputs,
            invariants: &self.invariants,
            summary,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.subcommand));
        write_json(&path, &manifest)?;
        for o in &self.outputs {
            println!("{}", self.dir.join(&o.file).display());
        }
        println!("{}", path.display());
        let failed: Vec<&str> = self.invariants.iter().filter(|i| i.hard && !i.passed).map(|i| i.name.as_str()).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invariant(format!("{}: hard invariants failed: {}", self.subcommand, failed.join(", "))))
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = create(path)?;
    let io = |e| CliError::io(path, e);
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Numerical(format!("json: {e}")))?;
    writeln!(out).map_err(io)?;
    out.flush().map_err(io)
}

/// SHA-256 of the compact JSON encoding of `(subcommand, config)`.
pub fn config_hash<C: Serialize>(subcommand: &str, config: &C) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(&(subcommand, config)).map_err(|e| CliError::Numerical(format!("json: {e}")))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}
