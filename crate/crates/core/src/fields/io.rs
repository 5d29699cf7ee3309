//! Flat binary field layout.
//!
//! Header (32 bytes, little endian): magic `NSRGFLD1`, `n: u64`,
//! `length: f64`, `time: f64`. Then `3 n^3` `f64` values: component 1, 2, 3 in
//! that order, each stored x-fastest. The time stamp is 0 for plain fields and
//! the simulation time for restart files.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fields::{BoxGrid, GridField};
use crate::real::Real;

pub const MAGIC: &[u8; 8] = b"NSRGFLD1";

pub fn write_field<T: Real, W: Write>(field: &GridField<T>, time: f64, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(field.grid.n as u64).to_le_bytes())?;
    w.write_all(&field.grid.length.to_f64_lossy().to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * field.grid.len());
    for c in &field.components {
        buf.clear();
        for v in c {
            buf.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field and its time stamp. The result is not flagged solenoidal;
/// callers re-check the divergence.
pub fn read_field<T: Real, R: Read>(mut r: R) -> Result<(GridField<T>, f64)> {
    let mut head = [0u8; 32];
    r.read_exact(&mut head)?;
    if &head[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |i: usize| -> [u8; 8] { head[i..i + 8].try_into().expect("8 bytes") };
    let n = u64::from_le_bytes(word(8)) as usize;
    let length = f64::from_le_bytes(word(16));
    let time = f64::from_le_bytes(word(24));
    let grid = BoxGrid::new(n, T::lit(length))?;
    let mut raw = vec![0u8; 8 * grid.len()];
    let mut comps: [Vec<T>; 3] = Default::default();
    for c in comps.iter_mut() {
        r.read_exact(&mut raw)
            .map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
        *c = raw
            .chunks_exact(8)
            .map(|b| T::lit(f64::from_le_bytes(b.try_into().expect("8 bytes"))))
            .collect();
    }
    let field = GridField::from_components(grid, comps)?;
    Ok((field, time))
}
