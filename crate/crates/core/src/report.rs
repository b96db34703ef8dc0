//! Output files: metadata headers, digests, atomic writes, and the
//! rounded summary document.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "bcycle";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;
pub const SUMMARY_DIGITS: i32 = 4;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        })
    }
}

/// Provenance stamped on every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    /// Compact JSON of the run configuration.
    pub config: String,
}

impl RunMeta {
    pub fn new(config_json: String, seed: u64, inputs: Vec<InputDigest>) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            config_sha256: sha256_hex(config_json.as_bytes()),
            seed,
            inputs,
            config: config_json,
        }
    }

    /// `#`-prefixed header lines for CSV outputs.
    pub fn header(&self) -> String {
        let mut s = format!("# tool: {} {}\n", self.tool, self.version);
        s.push_str(&format!("# config_sha256: {}\n", self.config_sha256));
        s.push_str(&format!("# seed: {}\n", self.seed));
        for i in &self.inputs {
            s.push_str(&format!("# input: {} sha256={}\n", i.path, i.sha256));
        }
        s.push_str(&format!("# config: {}\n", self.config));
        s
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Shortest round-trip decimal; empty for `None`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A CSV table held in memory until written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
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

    pub fn to_bytes(&self, meta: &RunMeta, extra: &[String]) -> Result<Vec<u8>> {
        let mut out = meta.header().into_bytes();
        for line in extra {
            out.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| Error::io("<csv buffer>", e.into_error()))
    }
}

/// Collects the files of one run directory.
#[derive(Debug)]
pub struct OutputDir {
    pub root: PathBuf,
    pub meta: RunMeta,
    pub written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: PathBuf, meta: RunMeta) -> Result<Self> {
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self {
            root,
            meta,
            written: Vec::new(),
        })
    }

    pub fn write_table(&mut self, name: &str, table: &Table, notes: &[String]) -> Result<PathBuf> {
        let bytes = table.to_bytes(&self.meta, notes)?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }
}

/// Rounds `x` to `digits` significant digits.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let s = format!("{:.*e}", (digits - 1) as usize, x);
    s.parse().unwrap_or(x)
}

/// Rounds every non-integer number inside `v`.
pub fn round_json(v: &mut Value, digits: i32) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x, digits)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| round_json(x, digits)),
        Value::Object(o) => o.values_mut().for_each(|x| round_json(x, digits)),
        _ => {}
    }
}
