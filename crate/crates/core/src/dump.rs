//! Binary dumps of grid data: a 32-byte little-endian header
//! (magic `QTNF`, u32 dim, u64 points_per_side, f64 dt, u32 components,
//! u32 frames) followed by row-major f64 values, frame by frame.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QTNF";
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpHeader {
    pub dim: u32,
    pub points_per_side: u64,
    pub dt: f64,
    /// 1 for real fields, 2 for interleaved complex values.
    pub components: u32,
    pub frames: u32,
}

impl DumpHeader {
    pub fn frame_len(&self) -> usize {
        (self.points_per_side as usize).pow(self.dim) * self.components as usize
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..4].copy_from_slice(MAGIC);
        h[4..8].copy_from_slice(&self.dim.to_le_bytes());
        h[8..16].copy_from_slice(&self.points_per_side.to_le_bytes());
        h[16..24].copy_from_slice(&self.dt.to_le_bytes());
        h[24..28].copy_from_slice(&self.components.to_le_bytes());
        h[28..32].copy_from_slice(&self.frames.to_le_bytes());
        h
    }

    fn decode(h: &[u8; HEADER_LEN]) -> Result<Self> {
        if &h[..4] != MAGIC {
            return Err(Error::Input("not a QTNF dump (bad magic)".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(h[i..i + 4].try_into().expect("4 bytes"));
        Ok(Self {
            dim: u32_at(4),
            points_per_side: u64::from_le_bytes(h[8..16].try_into().expect("8 bytes")),
            dt: f64::from_le_bytes(h[16..24].try_into().expect("8 bytes")),
            components: u32_at(24),
            frames: u32_at(28),
        })
    }
}

pub fn write_dump<W: Write>(mut w: W, header: DumpHeader, frames: &[&[f64]]) -> Result<()> {
    if frames.len() != header.frames as usize {
        return Err(Error::Input("frame count does not match header".into()));
    }
    w.write_all(&header.encode())?;
    let len = header.frame_len();
    for f in frames {
        if f.len() != len {
            return Err(Error::Input(format!("frame has {} values, expected {len}", f.len())));
        }
        let mut bytes = Vec::with_capacity(len * 8);
        for v in *f {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes)?;
    }
    Ok(())
}

pub fn read_dump<R: Read>(mut r: R) -> Result<(DumpHeader, Vec<Vec<f64>>)> {
    let mut h = [0u8; HEADER_LEN];
    r.read_exact(&mut h)?;
    let header = DumpHeader::decode(&h)?;
    let len = header.frame_len();
    let mut frames = Vec::with_capacity(header.frames as usize);
    let mut buf = vec![0u8; len * 8];
    for _ in 0..header.frames {
        r.read_exact(&mut buf)?;
        frames.push(
            buf.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        );
    }
    Ok((header, frames))
}

pub fn write_dump_file(path: &Path, header: DumpHeader, frames: &[&[f64]]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_dump(std::io::BufWriter::new(file), header, frames)
}

pub fn read_dump_file(path: &Path) -> Result<(DumpHeader, Vec<Vec<f64>>)> {
    read_dump(std::io::BufReader::new(std::fs::File::open(path)?))
}
