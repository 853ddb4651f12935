//! Field files: a JSON header plus a raw little-endian (re, im) f64 body,
//! or a 1-D CSV of `x, re, im` rows.

use super::{Grid, SampledField};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    pub dtype: String,
    /// Raw data file, relative to the header. Defaults to `<stem>.bin`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
}

fn data_path(header_path: &Path, header: &FieldHeader) -> PathBuf {
    let dir = header_path.parent().unwrap_or(Path::new("."));
    match &header.data {
        Some(name) => dir.join(name),
        None => header_path.with_extension("bin"),
    }
}

/// Write `path` (JSON header) and its sibling `.bin` file.
pub fn write_field(path: &Path, f: &SampledField) -> Result<()> {
    let bin = path.with_extension("bin");
    let header = FieldHeader {
        dim: f.dim(),
        shape: f.grid.shape.clone(),
        spacing: f.grid.spacing.clone(),
        origin: f.grid.origin.clone(),
        dtype: "c128".into(),
        data: bin.file_name().map(|n| n.to_string_lossy().into_owned()),
    };
    let mut raw = Vec::with_capacity(16 * f.values.len());
    for v in &f.values {
        raw.extend_from_slice(&v.re.to_le_bytes());
        raw.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(&bin, raw)?;
    fs::write(path, serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<SampledField> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return read_csv(path);
    }
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(path)?)?;
    if header.dtype != "c128" {
        return Err(Error::InvalidConfig(format!("unsupported dtype '{}'", header.dtype)));
    }
    if header.dim != header.shape.len() {
        return Err(Error::InvalidConfig("header dim does not match shape".into()));
    }
    let grid = Grid::new(header.shape.clone(), header.spacing.clone(), header.origin.clone())?;
    let raw = fs::read(data_path(path, &header))?;
    if raw.len() != 16 * grid.len() {
        return Err(Error::InvalidConfig(format!(
            "data file has {} bytes, expected {}",
            raw.len(),
            16 * grid.len()
        )));
    }
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    SampledField::new(grid, values)
}

fn read_csv(path: &Path) -> Result<SampledField> {
    let text = fs::read_to_string(path)?;
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Vec<f64> = cols.iter().filter_map(|c| c.parse().ok()).collect();
        if parsed.len() != cols.len() || !(2..=3).contains(&cols.len()) {
            if xs.is_empty() && lineno == 0 {
                continue; // header row
            }
            return Err(Error::InvalidConfig(format!("bad CSV row {}: '{line}'", lineno + 1)));
        }
        xs.push(parsed[0]);
        vals.push(Complex64::new(parsed[1], parsed.get(2).copied().unwrap_or(0.0)));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidConfig("CSV field needs at least two rows".into()));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    for (i, x) in xs.iter().enumerate() {
        if (x - (xs[0] + i as f64 * h)).abs() > 1e-6 * h.abs() {
            return Err(Error::InvalidConfig("CSV samples are not uniformly spaced".into()));
        }
    }
    SampledField::new(Grid::new(vec![xs.len()], vec![h], vec![xs[0]])?, vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(vec![4, 3], vec![0.5, 0.25], vec![-1.0, 2.0]).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::new(x[0], -x[1]));
        let p = dir.path().join("f.json");
        write_field(&p, &f).unwrap();
        assert!(dir.path().join("f.bin").exists());
        assert_eq!(read_field(&p).unwrap(), f);
    }

    #[test]
    fn csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        fs::write(&p, "x,re,im\n-1,1,0\n-0.5,2,1\n0,3,0\n").unwrap();
        let f = read_field(&p).unwrap();
        assert_eq!(f.grid.shape, vec![3]);
        assert!((f.grid.spacing[0] - 0.5).abs() < 1e-15);
        assert_eq!(f.values[1], Complex64::new(2.0, 1.0));
        fs::write(&p, "0,1,0\n0.5,1,0\n2,1,0\n").unwrap();
        assert!(read_field(&p).is_err());
    }
}
