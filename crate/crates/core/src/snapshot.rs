//! Binary snapshot format.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `MAGW` |
//! | 4     | format version, `u32` (currently 1) |
//! | 4     | truncation radius K, `u32` |
//! | 4     | grid size M, `u32` |
//! | 8     | time, IEEE-754 binary64 |
//! | 48·N  | per mode in lattice order: `(re, im)` binary64 pairs for components 1, 2, 3 |
//!
//! N is the number of modes with `|k| <= K`; the mode order is the lexicographic
//! order of [`WaveLattice`], so the mode vectors themselves are not stored.

use std::io::{Read, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::lattice::WaveLattice;

pub const MAGIC: &[u8; 4] = b"MAGW";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(out: &mut W, time: f64, field: &FourierField) -> Result<()> {
    let lat = field.lattice();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(lat.radius() as u32).to_le_bytes())?;
    out.write_all(&(lat.grid_size() as u32).to_le_bytes())?;
    out.write_all(&time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(48 * lat.len());
    for v in field.coeffs() {
        for z in v {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn encode_snapshot(time: f64, field: &FourierField) -> Vec<u8> {
    let mut out = Vec::new();
    write_snapshot(&mut out, time, field).expect("writing to a Vec cannot fail");
    out
}

/// Read a snapshot. When `lattice` is given it must match the stored K and M;
/// otherwise a lattice is built from the header.
pub fn read_snapshot<R: Read>(
    input: &mut R,
    lattice: Option<&Arc<WaveLattice>>,
) -> Result<(f64, FourierField)> {
    let mut head = [0u8; 24];
    input.read_exact(&mut head).map_err(|e| truncated(e, "header"))?;
    if &head[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let (k, m) = (word(8) as usize, word(12) as usize);
    let time = f64::from_le_bytes(head[16..24].try_into().unwrap());
    let lat = match lattice {
        Some(l) if l.radius() == k && l.grid_size() == m => Arc::clone(l),
        Some(l) => {
            return Err(Error::LatticeMismatch {
                left_k: k,
                left_m: m,
                right_k: l.radius(),
                right_m: l.grid_size(),
            })
        }
        None => WaveLattice::with_grid(k, m)?,
    };
    let mut body = vec![0u8; 48 * lat.len()];
    input.read_exact(&mut body).map_err(|e| truncated(e, "coefficients"))?;
    let num = |i: usize| f64::from_le_bytes(body[8 * i..8 * i + 8].try_into().unwrap());
    let coeffs = (0..lat.len())
        .map(|mode| {
            std::array::from_fn(|c| {
                let base = 6 * mode + 2 * c;
                Complex64::new(num(base), num(base + 1))
            })
        })
        .collect();
    let field = FourierField::from_coeffs(&lat, coeffs)?;
    if !field.is_finite() {
        return Err(Error::Format("non-finite coefficient".into()));
    }
    Ok((time, field))
}

fn truncated(e: std::io::Error, what: &str) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format(format!("truncated {what}"))
    } else {
        Error::Io(e)
    }
}
