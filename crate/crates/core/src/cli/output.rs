use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::UInt(v) => write!(f, "{v}"),
            // Shortest representation that parses back to the same double.
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Rows of equal arity under named columns with units.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<(String, String)>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    /// `columns` holds `(name, unit)` pairs; use `""` for dimensionless.
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns
                .iter()
                .map(|(n, u)| (n.to_string(), u.to_string()))
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row arity");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn units(&self) -> BTreeMap<String, String> {
        self.columns.iter().cloned().collect()
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|(n, _)| n.as_str()))
            .expect("write to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))
                .expect("write to memory");
        }
        w.into_inner().expect("flush to memory")
    }
}

/// One file produced by a command.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
    pub units: BTreeMap<String, String>,
}

impl Artifact {
    pub fn csv(name: &str, table: &ResultTable) -> Self {
        Self {
            name: name.to_string(),
            bytes: table.to_csv(),
            units: table.units(),
        }
    }

    pub fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable summary");
        bytes.push(b'\n');
        Self {
            name: name.to_string(),
            bytes,
            units: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, Json>,
    pub hash: String,
    pub version: String,
    pub timestamp: String,
    pub outputs: Vec<String>,
    /// Column units per CSV output.
    pub units: BTreeMap<String, BTreeMap<String, String>>,
    /// Exit code of the run that produced the outputs.
    pub exit_code: i32,
}

/// SHA-256 over the command name and the parameters as sorted-key JSON.
pub fn params_hash(command: &str, params: &BTreeMap<String, Json>) -> String {
    let canonical = serde_json::to_string(params).expect("JSON map");
    let digest = Sha256::new()
        .chain_update(command.as_bytes())
        .chain_update(b"\n")
        .chain_update(canonical.as_bytes())
        .finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "no file name"))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn read_manifest(dir: &Path) -> Option<RunManifest> {
    let bytes = fs::read(dir.join(MANIFEST_NAME)).ok()?;
    serde_json::from_slice(&bytes).ok()
}

/// A previous successful run with this hash whose outputs are all present.
pub fn cached(dir: &Path, hash: &str) -> Option<RunManifest> {
    read_manifest(dir).filter(|m| {
        m.hash == hash && m.exit_code == 0 && m.outputs.iter().all(|o| dir.join(o).is_file())
    })
}
