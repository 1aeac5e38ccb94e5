//! Flat binary field files with a JSON sidecar.
//!
//! Layout: `dim: u64`, `N: u64`, `L: f64`, then `N^dim` pairs `(re, im)` of `f64`,
//! all little-endian, row-major with axis 0 slowest.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Field, Grid, Space};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSidecar {
    pub dim: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub space: Space,
    pub layout: String,
    pub encoding: String,
    pub time: Option<f64>,
}

const LAYOUT: &str = "row-major";
const ENCODING: &str = "f64-le-interleaved";

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_field(field: &Field, path: &Path, time: Option<f64>) -> Result<()> {
    let g = field.grid();
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(&(g.dim as u64).to_le_bytes())?;
    out.write_all(&(g.points as u64).to_le_bytes())?;
    out.write_all(&g.half_width.to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    out.flush()?;

    let sidecar = FieldSidecar {
        dim: g.dim,
        points: g.points,
        half_width: g.half_width,
        space: field.space(),
        layout: LAYOUT.into(),
        encoding: ENCODING.into(),
        time,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_field(path: &Path) -> Result<(Field, FieldSidecar)> {
    let sidecar: FieldSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let mut input = BufReader::new(fs::File::open(path)?);
    let dim = read_u64(&mut input)? as usize;
    let points = read_u64(&mut input)? as usize;
    let half_width = read_f64(&mut input)?;
    if dim != sidecar.dim || points != sidecar.points || half_width.to_bits() != sidecar.half_width.to_bits() {
        return Err(Error::Numerical(format!("header of {} disagrees with its sidecar", path.display())));
    }
    let grid = Grid::new(dim, points, half_width)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = read_f64(&mut input)?;
        let im = read_f64(&mut input)?;
        values.push(Complex64::new(re, im));
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Numerical(format!("{} trailing bytes in {}", rest.len(), path.display())));
    }
    Ok((Field::from_values(grid, values, sidecar.space)?, sidecar))
}
