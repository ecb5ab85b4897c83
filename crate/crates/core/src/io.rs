//! Binary field checkpoints.
//!
//! Layout (little-endian): magic `BOLAB1`, then u32 dim, u32 resolution,
//! u32 components, f64 time, then the samples as row-major f64, one
//! component block after another. Flow-state checkpoints stack
//! `dim + 2` blocks in the order rho, u_1..u_dim, P.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::PeriodicField;
use crate::grid::Grid;

pub const MAGIC: &[u8; 6] = b"BOLAB1";

/// Write `blocks` scalar sample blocks sharing one grid.
pub fn write_blocks(path: &Path, grid: &Grid, blocks: &[&[f64]], time: f64) -> Result<()> {
    let points = grid.points();
    for b in blocks {
        if b.len() != points {
            return Err(Error::Checkpoint(format!(
                "block length {} does not match grid points {points}",
                b.len()
            )));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.resolution() as u32).to_le_bytes())?;
    w.write_all(&(blocks.len() as u32).to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for b in blocks {
        for v in *b {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read back all blocks of a checkpoint.
pub fn read_blocks(path: &Path) -> Result<(Grid, Vec<Vec<f64>>, f64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?} in {}",
            magic,
            path.display()
        )));
    }
    let dim = read_u32(&mut r)? as usize;
    let resolution = read_u32(&mut r)? as usize;
    let components = read_u32(&mut r)? as usize;
    let time = read_f64(&mut r)?;
    let grid = Grid::new(dim, resolution, std::f64::consts::TAU)
        .map_err(|e| Error::Checkpoint(format!("{e} in {}", path.display())))?;
    let points = grid.points();
    let mut blocks = Vec::with_capacity(components);
    let mut buf = vec![0u8; points * 8];
    for _ in 0..components {
        r.read_exact(&mut buf)?;
        let block: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        blocks.push(block);
    }
    Ok((grid, blocks, time))
}

pub fn write_field(path: &Path, field: &PeriodicField, time: f64) -> Result<()> {
    let blocks: Vec<&[f64]> = (0..field.components()).map(|c| field.component(c)).collect();
    write_blocks(path, field.grid(), &blocks, time)
}

pub fn read_field(path: &Path) -> Result<(PeriodicField, f64)> {
    let (grid, blocks, time) = read_blocks(path)?;
    let components = blocks.len();
    if components != 1 && components != grid.dim() {
        return Err(Error::Checkpoint(format!(
            "checkpoint holds {components} blocks; expected a scalar or vector field"
        )));
    }
    let data: Vec<f64> = blocks.into_iter().flatten().collect();
    Ok((PeriodicField::from_data(grid, components, data)?, time))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
