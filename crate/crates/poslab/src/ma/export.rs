use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::grid::TorusGrid;
use super::MaError;

#[derive(Serialize)]
struct Sidecar<'a> {
    shape: &'a [usize],
    axis_order: &'a [&'a str],
    dtype: &'a str,
    endianness: &'a str,
    layout: &'a str,
    normalization: &'a str,
}

/// Write `field` as raw little-endian f64 to `<dir>/<stem>.f64` with a JSON
/// sidecar `<dir>/<stem>.json`.
pub fn export_field(dir: &Path, stem: &str, field: &[f64], grid: &TorusGrid) -> Result<(PathBuf, PathBuf), MaError> {
    if field.len() != grid.len() {
        return Err(MaError::InvalidProblem("field does not match the grid".into()));
    }
    fs::create_dir_all(dir)?;
    let bin = dir.join(format!("{stem}.f64"));
    let meta = dir.join(format!("{stem}.json"));
    let bytes: Vec<u8> = field.iter().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(&bin, bytes)?;
    let axes = ["x1", "y1", "x2", "y2"];
    let sidecar = Sidecar {
        shape: &grid.sizes,
        axis_order: &axes[..grid.sizes.len()],
        dtype: "f64",
        endianness: "little",
        layout: "row-major",
        normalization: "sup u = 0",
    };
    fs::write(
        &meta,
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
    )?;
    Ok((bin, meta))
}

/// Read back a field written by [`export_field`].
pub fn read_field(path: &Path) -> Result<Vec<f64>, MaError> {
    let bytes = fs::read(path)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}
