//! Binary field snapshots.
//!
//! Layout: magic bytes `HKS1`, u32 dim, u32 n (both little-endian), then
//! `n^dim` little-endian f64 values row-major.

use crate::error::{HksError, Result};
use crate::field::RealField;
use crate::grid::TorusGrid;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"HKS1";

pub fn write_snapshot(w: &mut impl Write, field: &RealField) -> Result<()> {
    let grid = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot(r: &mut impl Read) -> Result<RealField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| HksError::Snapshot("file too short for header".into()))?;
    if &magic != MAGIC {
        return Err(HksError::Snapshot(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)
        .map_err(|_| HksError::Snapshot("truncated header".into()))?;
    let dim = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)
        .map_err(|_| HksError::Snapshot("truncated header".into()))?;
    let n = u32::from_le_bytes(word) as usize;
    let grid = TorusGrid::new(dim, n)?;

    let mut values = Vec::with_capacity(grid.len());
    let mut buf = [0u8; 8];
    for i in 0..grid.len() {
        r.read_exact(&mut buf).map_err(|_| {
            HksError::Snapshot(format!("expected {} values, file ends at {i}", grid.len()))
        })?;
        values.push(f64::from_le_bytes(buf));
    }
    // reject trailing bytes so corrupted files cannot slip through
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(HksError::Snapshot("trailing bytes after payload".into()));
    }
    RealField::new(grid, values)
}

pub fn save_snapshot(path: &Path, field: &RealField) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_snapshot(&mut f, field)?;
    f.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<RealField> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_snapshot(&mut f)
}
