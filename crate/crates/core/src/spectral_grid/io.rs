//! Field files.
//!
//! Binary layout, all little-endian:
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 8    | magic `ELWFLD01`                          |
//! | 8      | 4    | `n` (u32), spatial dimension              |
//! | 12     | 4    | `M` (u32), points per axis                |
//! | 16     | 8    | `L` (f64), half period                    |
//! | 24     | ...  | `Mⁿ·n` pairs `(re, im)` of f64            |
//!
//! Payload order is row-major over the grid (last axis fastest) with the
//! `n` components of each point adjacent.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{TorusGrid, VectorField};
use crate::error::{Error, Result};

pub const FIELD_MAGIC: &[u8; 8] = b"ELWFLD01";

pub fn write_field<W: Write>(mut w: W, field: &VectorField) -> Result<()> {
    let g = field.grid();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.points() as u32).to_le_bytes())?;
    w.write_all(&g.half_period().to_le_bytes())?;
    let mut buf = Vec::with_capacity(field.values().len() * 16);
    for z in field.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<VectorField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let points = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let half_period = f64::from_le_bytes(b8);
    let grid = TorusGrid::new(dim, points, half_period)?;

    let count = grid.len() * dim;
    let mut payload = vec![0u8; count * 16];
    r.read_exact(&mut payload).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated payload".into()),
        _ => Error::Io(e),
    })?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    VectorField::new(grid, values)
}

/// Plain CSV: `x1,..,xn,re_u1,im_u1,..` with a header row; intended for small grids.
pub fn write_field_csv<W: Write>(mut w: W, field: &VectorField) -> Result<()> {
    let g = field.grid();
    let n = g.dim();
    let mut header: Vec<String> = (1..=n).map(|d| format!("x{d}")).collect();
    for c in 1..=n {
        header.push(format!("re_u{c}"));
        header.push(format!("im_u{c}"));
    }
    writeln!(w, "{}", header.join(","))?;
    for p in 0..g.len() {
        let mut row: Vec<String> = g.position(p).iter().map(|x| x.to_string()).collect();
        for z in field.at(p) {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}
