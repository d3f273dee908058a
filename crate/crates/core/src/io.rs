//! Field dumps and report files.
//!
//! A field dump is a raw little-endian `f64` array, one value per cell with
//! x varying fastest, then y, then z. Next to `name.f64` sits
//! `name.f64.meta.json` holding the grid, the field name and the resolved
//! run configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub field: String,
    pub origin: Vec<f64>,
    pub h: f64,
    pub dims: Vec<usize>,
    pub dtype: String,
    pub order: String,
    #[serde(default)]
    pub config: serde_json::Value,
}

/// Path of the sidecar written next to `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_sidecar<T: Serialize>(path: &Path, meta: &T) -> Result<PathBuf> {
    let side = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(&side, text)?;
    Ok(side)
}

/// Writes `field` to `path` and its metadata sidecar.
pub fn write_field_dump(path: &Path, name: &str, field: &ScalarField, config: &serde_json::Value) -> Result<()> {
    let grid = field.grid();
    let mut bytes = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let meta = FieldMeta {
        field: name.to_string(),
        origin: grid.origin().to_vec(),
        h: grid.h(),
        dims: grid.dims().to_vec(),
        dtype: "f64le".into(),
        order: "x fastest, then y, then z".into(),
        config: config.clone(),
    };
    write_sidecar(path, &meta)?;
    Ok(())
}

/// Reads a dump written by [`write_field_dump`].
pub fn read_field_dump(path: &Path) -> Result<(FieldMeta, ScalarField)> {
    let meta: FieldMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    if meta.dtype != "f64le" {
        return Err(Error::Grid(format!("unsupported dump dtype `{}`", meta.dtype)));
    }
    let grid = GridSpec::new(&meta.origin, meta.h, &meta.dims)?;
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::Grid(format!("dump holds {} bytes, grid needs {}", bytes.len(), 8 * grid.len())));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((meta, ScalarField::new(grid, values)?))
}

/// CSV `x,y,value` of the z-layer `k` (ignored for 2-D grids).
pub fn slice_csv(field: &ScalarField, k: usize) -> Result<String> {
    let grid = field.grid();
    let dims = grid.dims();
    let layer = if grid.ndim() == 3 { k } else { 0 };
    if grid.ndim() == 3 && k >= dims[2] {
        return Err(Error::Grid(format!("slice {k} outside 0..{}", dims[2])));
    }
    let mut out = String::from("x,y,value\n");
    for j in 0..dims[1] {
        for i in 0..dims[0] {
            let idx = grid.index(i, j, layer);
            let c = grid.cell_center(idx);
            out.push_str(&format!("{},{},{:e}\n", c.x, c.y, field.values()[idx]));
        }
    }
    Ok(out)
}

/// Writes a text file together with a sidecar recording `config`.
pub fn write_text_with_meta(path: &Path, text: &str, config: &serde_json::Value) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    write_sidecar(path, &serde_json::json!({ "config": config }))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new(&[0.0, -1.0, 2.0], 0.5, &[3, 2, 4]).unwrap();
        let field = ScalarField::from_fn(grid, |p| p.x + 10.0 * p.y - p.z);
        let path = dir.path().join("f.f64");
        write_field_dump(&path, "test", &field, &serde_json::json!({"k": 1})).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 8 * 24);
        let (meta, back) = read_field_dump(&path).unwrap();
        assert_eq!(meta.field, "test");
        assert_eq!(meta.config["k"], 1);
        assert_eq!(back, field);
        // first value is the (0,0,0) cell
        let first = f64::from_le_bytes(fs::read(&path).unwrap()[..8].try_into().unwrap());
        assert_eq!(first, 0.25 + 10.0 * -0.75 - 2.25);
    }

    #[test]
    fn slice_has_one_row_per_cell() {
        let grid = GridSpec::cube(0.0, 1.0, 0.25, 3).unwrap();
        let field = ScalarField::from_fn(grid, |p| p.z);
        let csv = slice_csv(&field, 2).unwrap();
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.lines().nth(1).unwrap().ends_with(",6.25e-1"));
        assert!(slice_csv(&field, 4).is_err());
    }
}
