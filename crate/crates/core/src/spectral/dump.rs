//! Raw field files: little-endian `f64` nodal values in row-major order,
//! with a JSON sidecar holding the grid, time and step.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{GridSpec, RealField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMeta {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    pub time: f64,
    pub step: usize,
}

impl FieldMeta {
    pub fn grid(&self) -> Result<GridSpec> {
        if self.n.len() != self.d {
            return Err(Error::InvalidParameter(format!(
                "field metadata: d = {} but {} point counts",
                self.d,
                self.n.len()
            )));
        }
        GridSpec::new(&self.n, &self.l)
    }
}

/// Sidecar path for a binary field path: `a/b.bin` → `a/b.json`.
pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Writes `<stem>.bin` and `<stem>.json` into `dir`, returning the binary path.
pub fn write_field(dir: &Path, stem: &str, f: &RealField, time: f64, step: usize) -> Result<PathBuf> {
    let bin = dir.join(format!("{stem}.bin"));
    let bytes: Vec<u8> = f.values().iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&bin, bytes)?;
    let g = f.grid();
    let meta = FieldMeta {
        d: g.dim(),
        n: g.shape().to_vec(),
        l: g.lengths().to_vec(),
        time,
        step,
    };
    fs::write(sidecar_path(&bin), serde_json::to_string_pretty(&meta)?)?;
    Ok(bin)
}

/// Reads a binary field and its sidecar.
pub fn read_field(bin: &Path) -> Result<(RealField, FieldMeta)> {
    let meta: FieldMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(bin))?)?;
    let grid = meta.grid()?;
    let bytes = fs::read(bin)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} holds {} bytes, expected {} for {grid}",
            bin.display(),
            bytes.len(),
            8 * grid.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((RealField::new(grid, values)?, meta))
}
