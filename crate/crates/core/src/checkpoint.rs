//! SNSF binary field checkpoints.
//!
//! Layout (all little-endian): magic `b"SNSF"`, format version `u32`, then `d`,
//! `M` and the component count as `u32`, then one `(re, im)` pair of `f64`
//! per coefficient in the field's storage order (components outermost,
//! lattice sites lexicographic in `(n_1, …, n_d)` from `-M` to `M`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;

pub const MAGIC: &[u8; 4] = b"SNSF";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

pub fn encode(field: &SpectralField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * field.coeffs().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim as u32).to_le_bytes());
    out.extend_from_slice(&(g.m as u32).to_le_bytes());
    out.extend_from_slice(&(g.dim as u32).to_le_bytes());
    for c in field.coeffs() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<SpectralField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected SNSF".into()));
    }
    let version = read_u32(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let dim = read_u32(bytes, 8) as usize;
    let m = read_u32(bytes, 12) as usize;
    let comps = read_u32(bytes, 16) as usize;
    if comps != dim {
        return Err(Error::Format(format!("component count {comps} does not match dimension {dim}")));
    }
    let grid = GridSpec::new(dim, m).map_err(|e| Error::Format(e.to_string()))?;
    let count = comps * grid.modes();
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * count {
        return Err(Error::Format(format!("expected {} coefficient bytes, found {}", 16 * count, body.len())));
    }
    let coeffs = body
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(ch[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs).map_err(|e| Error::Format(e.to_string()))
}

pub fn write(path: impl AsRef<Path>, field: &SpectralField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(field))?;
    w.flush()?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<SpectralField> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes)
}
