//! File formats: a run-length container for cell sets, 8-bit PGM masks and
//! 16-bit PGM label rasters. Rasters are written top row first.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CellSet, GridSpace};

const MAGIC: &[u8; 4] = b"CWLS";
const VERSION: u16 = 1;

/// Label value meaning "not in the domain".
pub const NO_LABEL: u32 = u32::MAX;

#[derive(Serialize, Deserialize)]
struct ContainerHeader {
    space: GridSpace,
    cells: usize,
}

pub fn write_cellset(set: &CellSet, mut w: impl Write) -> Result<()> {
    let space = *set.space();
    let header = serde_json::to_vec(&ContainerHeader { space, cells: set.len() })
        .map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    let mask = set.mask();
    for row in 0..space.height() {
        let line = &mask[row * space.width()..(row + 1) * space.width()];
        let mut runs = Vec::new();
        let mut c = 0;
        while c < line.len() {
            if line[c] {
                let start = c;
                while c < line.len() && line[c] {
                    c += 1;
                }
                runs.push((start as u32, (c - start) as u32));
            } else {
                c += 1;
            }
        }
        w.write_all(&(runs.len() as u32).to_le_bytes())?;
        for (s, l) in runs {
            w.write_all(&s.to_le_bytes())?;
            w.write_all(&l.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| Error::Format("truncated container".into()))?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_cellset(mut r: impl Read) -> Result<CellSet> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format("truncated container".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("not a cell-set container".into()));
    }
    let mut v = [0u8; 2];
    r.read_exact(&mut v).map_err(|_| Error::Format("truncated container".into()))?;
    if u16::from_le_bytes(v) != VERSION {
        return Err(Error::Format(format!("unsupported container version {}", u16::from_le_bytes(v))));
    }
    let hlen = read_u32(&mut r)? as usize;
    if hlen > 1 << 20 {
        return Err(Error::Format("header too large".into()));
    }
    let mut hbuf = vec![0u8; hlen];
    r.read_exact(&mut hbuf).map_err(|_| Error::Format("truncated header".into()))?;
    let header: ContainerHeader =
        serde_json::from_slice(&hbuf).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    let space = header.space;
    let mut cells = Vec::with_capacity(header.cells);
    for row in 0..space.height() {
        let n = read_u32(&mut r)?;
        for _ in 0..n {
            let s = read_u32(&mut r)? as usize;
            let l = read_u32(&mut r)? as usize;
            if s + l > space.width() {
                return Err(Error::Format(format!("run overflows row {row}")));
            }
            cells.extend((s..s + l).map(|c| space.index(c, row)));
        }
    }
    if cells.len() != header.cells {
        return Err(Error::Format("cell count does not match header".into()));
    }
    CellSet::new(space, cells)
}

/// Binary P5 mask: 255 inside, 0 outside.
pub fn write_mask_pgm(set: &CellSet, mut w: impl Write) -> Result<()> {
    let space = set.space();
    let mask = set.mask();
    write!(w, "P5\n{} {}\n255\n", space.width(), space.height())?;
    for row in (0..space.height()).rev() {
        let line: Vec<u8> =
            (0..space.width()).map(|c| if mask[space.index(c, row)] { 255 } else { 0 }).collect();
        w.write_all(&line)?;
    }
    Ok(())
}

/// 16-bit P5 label raster: stored value = label + 1, zero outside the domain.
pub fn write_label_pgm(space: &GridSpace, labels: &[u32], mut w: impl Write) -> Result<()> {
    if labels.len() != space.len() {
        return Err(Error::Format("label raster size mismatch".into()));
    }
    if labels.iter().any(|&l| l != NO_LABEL && l >= 65535) {
        return Err(Error::Format("more than 65534 plaques do not fit a 16-bit raster".into()));
    }
    write!(w, "P5\n{} {}\n65535\n", space.width(), space.height())?;
    for row in (0..space.height()).rev() {
        for c in 0..space.width() {
            let l = labels[space.index(c, row)];
            let v: u16 = if l == NO_LABEL { 0 } else { l as u16 + 1 };
            w.write_all(&v.to_be_bytes())?;
        }
    }
    Ok(())
}

fn pgm_token(data: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < data.len() && data[*pos].is_ascii_digit() {
        *pos += 1;
    }
    std::str::from_utf8(&data[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("malformed PGM header".into()))
}

/// Reads a P5 raster, returning (width, height, maxval, row-major values bottom row first).
pub fn read_pgm(data: &[u8]) -> Result<(usize, usize, u32, Vec<u32>)> {
    if data.len() < 2 || &data[..2] != b"P5" {
        return Err(Error::Format("not a binary PGM".into()));
    }
    let mut pos = 2;
    let w = pgm_token(data, &mut pos)?;
    let h = pgm_token(data, &mut pos)?;
    let maxval = pgm_token(data, &mut pos)? as u32;
    pos += 1;
    let bytes = if maxval < 256 { 1 } else { 2 };
    if maxval == 0 || maxval > 65535 || data.len() < pos + w * h * bytes {
        return Err(Error::Format("truncated PGM data".into()));
    }
    let mut out = vec![0u32; w * h];
    for (i, chunk) in data[pos..pos + w * h * bytes].chunks(bytes).enumerate() {
        let v = if bytes == 1 { chunk[0] as u32 } else { u16::from_be_bytes([chunk[0], chunk[1]]) as u32 };
        let (c, r) = (i % w, h - 1 - i / w);
        out[r * w + c] = v;
    }
    Ok((w, h, maxval, out))
}

pub fn read_label_pgm(space: &GridSpace, data: &[u8]) -> Result<Vec<u32>> {
    let (w, h, _, vals) = read_pgm(data)?;
    if w != space.width() || h != space.height() {
        return Err(Error::Format("label raster does not match the space".into()));
    }
    Ok(vals.into_iter().map(|v| if v == 0 { NO_LABEL } else { v - 1 }).collect())
}
