//! Distance-matrix files: a little-endian binary format (`GSBM`, version,
//! size, row-major reals) and a CSV export.

use std::io::{Read, Write};

use super::{GramError, GramMatrix, GramMeta};

const MAGIC: &[u8; 4] = b"GSBM";
const VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> GramError {
    GramError::Format(e.to_string())
}

pub fn write_binary<W: Write>(m: &GramMatrix, mut out: W) -> Result<(), GramError> {
    out.write_all(MAGIC).map_err(io_err)?;
    out.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    out.write_all(&(m.n() as u64).to_le_bytes()).map_err(io_err)?;
    for x in m.entries() {
        out.write_all(&x.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

/// Reads a matrix written by [`write_binary`]; provenance is not stored, so
/// the metadata comes back empty.
pub fn read_binary<R: Read>(mut input: R) -> Result<GramMatrix, GramError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(GramError::Format("bad magic".into()));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word).map_err(io_err)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(GramError::Format(format!("unsupported version {version}")));
    }
    let mut long = [0u8; 8];
    input.read_exact(&mut long).map_err(io_err)?;
    let n = usize::try_from(u64::from_le_bytes(long))
        .map_err(|_| GramError::Format("matrix too large".into()))?;
    let count = n
        .checked_mul(n)
        .ok_or_else(|| GramError::Format("matrix too large".into()))?;
    let mut entries = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        input.read_exact(&mut long).map_err(io_err)?;
        entries.push(f64::from_le_bytes(long));
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest).map_err(io_err)?;
    if !rest.is_empty() {
        return Err(GramError::Format(format!("{} trailing bytes", rest.len())));
    }
    GramMatrix::from_entries(n, entries, GramMeta::default())
}

pub fn write_csv<W: Write>(m: &GramMatrix, mut out: W) -> Result<(), GramError> {
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(",")).map_err(io_err)?;
    }
    Ok(())
}
