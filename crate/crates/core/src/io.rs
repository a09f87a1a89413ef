//! Field persistence.
//!
//! Binary layout (little endian):
//!
//! ```text
//! b"HWF1" | d: u32 | N: u32 | L: f64 | N^d × (re: f64, im: f64)
//! ```
//!
//! with samples in row-major node order. CSV exports are lossy and meant
//! for plotting only.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"HWF1";
const HEADER_LEN: usize = 4 + 4 + 4 + 8;

pub fn encode_field(u: &Field) -> Vec<u8> {
    let g = u.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * g.size());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.len().to_le_bytes());
    for z in u.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format(format!("unknown magic {:?}", String::from_utf8_lossy(&bytes[..4]))));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let real = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (dim, n, len) = (word(4) as usize, word(8) as usize, real(12));
    let grid = Grid::new(dim, n, len).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * grid.size() {
        return Err(Error::Format(format!(
            "expected {} sample bytes, found {}",
            16 * grid.size(),
            body.len()
        )));
    }
    let values = body.chunks_exact(16).map(|c| Complex64::new(real_at(c, 0), real_at(c, 8))).collect();
    Field::new(&grid, values)
}

fn real_at(chunk: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(chunk[at..at + 8].try_into().unwrap())
}

pub fn write_field(path: &Path, u: &Field) -> Result<()> {
    fs::write(path, encode_field(u))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<Field> {
    decode_field(&fs::read(path)?)
}

/// Rows `x, re, im, |u|` (1D) or `x, y, re, im, |u|` (2D).
pub fn write_field_csv<W: Write>(mut w: W, u: &Field) -> Result<()> {
    let g = u.grid();
    if g.dim() == 1 {
        writeln!(w, "x,re,im,abs")?;
    } else {
        writeln!(w, "x,y,re,im,abs")?;
    }
    for (i, z) in u.values().iter().enumerate() {
        let x = g.node(i);
        if g.dim() == 1 {
            writeln!(w, "{},{},{},{}", x[0], z.re, z.im, z.norm())?;
        } else {
            writeln!(w, "{},{},{},{},{}", x[0], x[1], z.re, z.im, z.norm())?;
        }
    }
    Ok(())
}
