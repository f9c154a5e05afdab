//! Artifact files. Every file is written to a temporary sibling and renamed,
//! and its SHA-256 is kept for the manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use cwlab::raster::NO_LABEL;
use cwlab::{CellSet, GridSpace};

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    /// Library operation the numbers in the file come from.
    pub op: String,
}

pub fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub struct Sink {
    dir: PathBuf,
    prefix: String,
    pub artifacts: Vec<Artifact>,
}

impl Sink {
    pub fn new(dir: &Path, prefix: String) -> Sink {
        Sink { dir: dir.to_path_buf(), prefix, artifacts: Vec::new() }
    }

    pub fn bytes(&mut self, suffix: &str, op: &str, bytes: &[u8]) -> Result<()> {
        let file = format!("{}{}", self.prefix, suffix);
        write_atomic(&self.dir.join(&file), bytes)?;
        self.artifacts.push(Artifact { file, sha256: sha256(bytes), op: op.to_string() });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, suffix: &str, op: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.bytes(suffix, op, &bytes)
    }

    pub fn csv<T: Serialize>(&mut self, suffix: &str, op: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.bytes(suffix, op, &bytes)
    }

    /// 16-bit PGM labels, a palette PNG and its legend.
    pub fn labels(&mut self, op: &str, space: &GridSpace, labels: &[u32]) -> Result<()> {
        let mut pgm = Vec::new();
        cwlab::raster::write_label_pgm(space, labels, &mut pgm)?;
        self.bytes(".pgm", op, &pgm)?;
        let rows = rows_top_first(space, labels);
        let (png, legend) = label_png(space.width(), space.height(), &rows)?;
        self.bytes(".png", op, &png)?;
        self.json(".legend.json", op, &legend)
    }

    pub fn mask(&mut self, op: &str, set: &CellSet) -> Result<()> {
        let mut pgm = Vec::new();
        cwlab::raster::write_mask_pgm(set, &mut pgm)?;
        self.bytes(".pgm", op, &pgm)?;
        let space = set.space();
        let m = set.mask();
        let labels: Vec<u32> = m.iter().map(|&b| if b { 0 } else { NO_LABEL }).collect();
        self.bytes(".png", op, &mask_png(space.width(), space.height(), &rows_top_first(space, &labels))?)
    }
}

fn rows_top_first(space: &GridSpace, labels: &[u32]) -> Vec<u32> {
    (0..space.height()).rev().flat_map(|r| (0..space.width()).map(move |c| labels[space.index(c, r)])).collect()
}

/// Fixed palette: hue steps by the golden ratio conjugate per label id.
pub fn color(id: u32) -> [u8; 3] {
    if id == NO_LABEL {
        return [255, 255, 255];
    }
    let h = (id as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let (s, v) = (0.6, 0.85);
    let c = v * s;
    let x = c * (1.0 - ((h % 2.0) - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [((r + m) * 255.0).round() as u8, ((g + m) * 255.0).round() as u8, ((b + m) * 255.0).round() as u8]
}

#[derive(Serialize)]
pub struct LegendEntry {
    pub id: u32,
    pub rgb: [u8; 3],
    pub cells: usize,
}

#[derive(Serialize)]
pub struct Legend {
    pub width: usize,
    pub height: usize,
    pub outside: [u8; 3],
    pub labels: Vec<LegendEntry>,
}

fn encode_png(w: usize, h: usize, rgb: Vec<u8>) -> Result<Vec<u8>> {
    let img = image::RgbImage::from_raw(w as u32, h as u32, rgb).context("raster size")?;
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)?;
    Ok(out.into_inner())
}

/// `labels` are row-major, top row first.
pub fn label_png(w: usize, h: usize, labels: &[u32]) -> Result<(Vec<u8>, Legend)> {
    let mut counts = std::collections::BTreeMap::new();
    let rgb: Vec<u8> = labels
        .iter()
        .flat_map(|&l| {
            if l != NO_LABEL {
                *counts.entry(l).or_insert(0) += 1;
            }
            color(l)
        })
        .collect();
    let legend = Legend {
        width: w,
        height: h,
        outside: color(NO_LABEL),
        labels: counts.into_iter().map(|(id, cells)| LegendEntry { id, rgb: color(id), cells }).collect(),
    };
    Ok((encode_png(w, h, rgb)?, legend))
}

pub fn mask_png(w: usize, h: usize, labels: &[u32]) -> Result<Vec<u8>> {
    encode_png(w, h, labels.iter().flat_map(|&l| if l == NO_LABEL { [255; 3] } else { [0; 3] }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_is_fixed_and_spread() {
        assert_eq!(color(NO_LABEL), [255, 255, 255]);
        assert_eq!(color(0), color(0));
        for i in 0..50 {
            assert_ne!(color(i), color(i + 1));
        }
    }
}
