//! Grid spaces, cell sets, metrics and the hyperspace kernels built on them.
//!
//! Cells are indexed row-major, row 0 at the bottom. Sets use eight-connectivity,
//! complements four-connectivity. All distances are between cell centers.

use std::collections::VecDeque;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Torus,
    SphereQuotient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceHeader {
    #[serde(flatten)]
    pub kind: SpaceKind,
    pub resolution: u32,
}

/// A discretized compact surface chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SpaceHeader", try_from = "SpaceHeader")]
pub struct GridSpace {
    kind: SpaceKind,
    resolution: u32,
    width: usize,
    height: usize,
}

impl From<GridSpace> for SpaceHeader {
    fn from(s: GridSpace) -> Self {
        SpaceHeader { kind: s.kind, resolution: s.resolution }
    }
}

impl TryFrom<SpaceHeader> for GridSpace {
    type Error = Error;
    fn try_from(h: SpaceHeader) -> Result<Self> {
        GridSpace::new(h.kind, h.resolution)
    }
}

impl GridSpace {
    pub fn new(kind: SpaceKind, resolution: u32) -> Result<Self> {
        if resolution < 8 {
            return Err(Error::InvalidSpace(format!("resolution {resolution} is below 8")));
        }
        let res = resolution as usize;
        let (width, height) = match kind {
            SpaceKind::Rectangle { x0, x1, y0, y1 } => {
                if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
                    return Err(Error::InvalidSpace("non-finite bounds".into()));
                }
                let w = ((x1 - x0) * resolution as f64).round();
                let h = ((y1 - y0) * resolution as f64).round();
                if w < 1.0 || h < 1.0 {
                    return Err(Error::InvalidSpace("rectangle has no cells".into()));
                }
                (w as usize, h as usize)
            }
            SpaceKind::Torus => (res, res),
            SpaceKind::SphereQuotient => {
                if res % 2 != 0 {
                    return Err(Error::InvalidSpace("sphere quotient needs an even resolution".into()));
                }
                (res, res / 2)
            }
        };
        Ok(GridSpace { kind, resolution, width, height })
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, resolution: u32) -> Result<Self> {
        Self::new(SpaceKind::Rectangle { x0, x1, y0, y1 }, resolution)
    }

    /// Rectangle whose cell centers sit on the lattice points of `[x0,x1]×[y0,y1]`,
    /// so the boundary lines and any lattice-aligned segment are cell centers.
    pub fn vertex_centered(x0: f64, x1: f64, y0: f64, y1: f64, resolution: u32) -> Result<Self> {
        let h = 0.5 / resolution as f64;
        Self::rectangle(x0 - h, x1 + h, y0 - h, y1 + h, resolution)
    }

    pub fn torus(resolution: u32) -> Result<Self> {
        Self::new(SpaceKind::Torus, resolution)
    }

    pub fn sphere(resolution: u32) -> Result<Self> {
        Self::new(SpaceKind::SphereQuotient, resolution)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }
    pub fn resolution(&self) -> u32 {
        self.resolution
    }
    pub fn cell_size(&self) -> f64 {
        1.0 / self.resolution as f64
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn len(&self) -> usize {
        self.width * self.height
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn is_rectangle(&self) -> bool {
        matches!(self.kind, SpaceKind::Rectangle { .. })
    }

    #[inline]
    pub fn col_row(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    fn origin(&self) -> (f64, f64) {
        match self.kind {
            SpaceKind::Rectangle { x0, y0, .. } => (x0, y0),
            _ => (0.0, 0.0),
        }
    }

    pub fn center(&self, idx: usize) -> (f64, f64) {
        let (c, r) = self.col_row(idx);
        let (x0, y0) = self.origin();
        let h = self.cell_size();
        (x0 + (c as f64 + 0.5) * h, y0 + (r as f64 + 0.5) * h)
    }

    /// Cell containing `p`; periodic spaces reduce `p` to the chart first.
    pub fn cell_at(&self, p: (f64, f64)) -> Option<usize> {
        let res = self.resolution as f64;
        let (x, y) = match self.kind {
            SpaceKind::Rectangle { x0, y0, .. } => ((p.0 - x0) * res, (p.1 - y0) * res),
            SpaceKind::Torus => (p.0.rem_euclid(1.0) * res, p.1.rem_euclid(1.0) * res),
            SpaceKind::SphereQuotient => {
                let q = sphere_chart(p);
                (q.0 * res, q.1 * res)
            }
        };
        if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 {
            return None;
        }
        let (c, r) = (x.floor() as usize, y.floor() as usize);
        // rem_euclid can round up to exactly 1.0
        let (c, r) = if self.is_rectangle() {
            (c, r)
        } else {
            (c.min(self.width - 1), r.min(self.height - 1))
        };
        (c < self.width && r < self.height).then(|| self.index(c, r))
    }

    /// The cell reached from `idx` by the step `(dc, dr)`, following the
    /// periodic and antipodal identifications. Steps are at most one cell.
    pub fn offset(&self, idx: usize, dc: i64, dr: i64) -> Option<usize> {
        let (c, r) = self.col_row(idx);
        let (c, r) = (c as i64 + dc, r as i64 + dr);
        match self.kind {
            SpaceKind::Rectangle { .. } => {
                if c < 0 || r < 0 || c >= self.width as i64 || r >= self.height as i64 {
                    None
                } else {
                    Some(self.index(c as usize, r as usize))
                }
            }
            SpaceKind::Torus => {
                let n = self.resolution as i64;
                Some(self.index(c.rem_euclid(n) as usize, r.rem_euclid(n) as usize))
            }
            SpaceKind::SphereQuotient => {
                let n = self.resolution as i64;
                let (c, r) = (c.rem_euclid(n), r.rem_euclid(n));
                let (c, r) = if r >= n / 2 { (n - 1 - c, n - 1 - r) } else { (c, r) };
                Some(self.index(c as usize, r as usize))
            }
        }
    }

    pub fn neighbors8(&self, idx: usize) -> ArrayVec<usize, 8> {
        const STEPS: [(i64, i64); 8] =
            [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        self.collect_steps(idx, &STEPS)
    }

    pub fn neighbors4(&self, idx: usize) -> ArrayVec<usize, 8> {
        const STEPS: [(i64, i64); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        self.collect_steps(idx, &STEPS)
    }

    fn collect_steps(&self, idx: usize, steps: &[(i64, i64)]) -> ArrayVec<usize, 8> {
        let mut out = ArrayVec::new();
        for &(dc, dr) in steps {
            if let Some(n) = self.offset(idx, dc, dr) {
                if n != idx && !out.contains(&n) {
                    out.push(n);
                }
            }
        }
        out
    }

    /// Squared metric between cell centers, in cell units. Exact.
    pub fn dist2_cells(&self, a: usize, b: usize) -> u64 {
        let (ca, ra) = self.col_row(a);
        let (cb, rb) = self.col_row(b);
        match self.kind {
            SpaceKind::Rectangle { .. } => {
                let dc = ca.abs_diff(cb) as u64;
                let dr = ra.abs_diff(rb) as u64;
                dc * dc + dr * dr
            }
            SpaceKind::Torus => {
                let n = self.resolution as usize;
                torus_d2(n, (ca, ra), (cb, rb))
            }
            SpaceKind::SphereQuotient => {
                let n = self.resolution as usize;
                torus_d2(n, (ca, ra), (cb, rb)).min(torus_d2(n, (ca, ra), (n - 1 - cb, n - 1 - rb)))
            }
        }
    }

    pub fn metric(&self, a: usize, b: usize) -> f64 {
        (self.dist2_cells(a, b) as f64).sqrt() * self.cell_size()
    }

    /// Metric between arbitrary points (not cells).
    pub fn point_distance(&self, p: (f64, f64), q: (f64, f64)) -> f64 {
        match self.kind {
            SpaceKind::Rectangle { .. } => (p.0 - q.0).hypot(p.1 - q.1),
            SpaceKind::Torus => torus_point_distance(p, q),
            SpaceKind::SphereQuotient => {
                torus_point_distance(p, q).min(torus_point_distance(p, (-q.0, -q.1)))
            }
        }
    }

    /// Cells whose centers lie within `r` of `p`.
    pub fn ball(&self, p: (f64, f64), r: f64) -> CellSet {
        let cells: Vec<usize> = match self.kind {
            SpaceKind::Rectangle { .. } => {
                let h = self.cell_size();
                let (x0, y0) = self.origin();
                let c0 = (((p.0 - r - x0) / h).floor().max(0.0)) as usize;
                let r0 = (((p.1 - r - y0) / h).floor().max(0.0)) as usize;
                let c1 = (((p.0 + r - x0) / h).ceil().max(0.0) as usize).min(self.width);
                let r1 = (((p.1 + r - y0) / h).ceil().max(0.0) as usize).min(self.height);
                let mut v = Vec::new();
                for row in r0..r1 {
                    for col in c0..c1 {
                        let i = self.index(col, row);
                        if self.point_distance(self.center(i), p) <= r {
                            v.push(i);
                        }
                    }
                }
                v
            }
            _ => (0..self.len()).filter(|&i| self.point_distance(self.center(i), p) <= r).collect(),
        };
        CellSet { space: *self, cells }
    }
}

fn torus_d2(n: usize, a: (usize, usize), b: (usize, usize)) -> u64 {
    let dc = a.0.abs_diff(b.0);
    let dr = a.1.abs_diff(b.1);
    let dc = dc.min(n - dc) as u64;
    let dr = dr.min(n - dr) as u64;
    dc * dc + dr * dr
}

fn torus_point_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let wrap = |d: f64| {
        let d = d.rem_euclid(1.0);
        d.min(1.0 - d)
    };
    wrap(p.0 - q.0).hypot(wrap(p.1 - q.1))
}

/// Representative of `p` in the sphere chart `[0,1)×[0,1/2)`.
pub fn sphere_chart(p: (f64, f64)) -> (f64, f64) {
    let x = p.0.rem_euclid(1.0);
    let y = p.1.rem_euclid(1.0);
    if y >= 0.5 {
        ((1.0 - x).rem_euclid(1.0), 1.0 - y)
    } else {
        (x, y)
    }
}

/// A finite set of cells of one space, kept sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSet {
    space: GridSpace,
    cells: Vec<usize>,
}

impl CellSet {
    pub fn new(space: GridSpace, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut cells: Vec<usize> = cells.into_iter().collect();
        let len = space.len();
        if let Some(&bad) = cells.iter().find(|&&c| c >= len) {
            return Err(Error::CellOutOfRange { index: bad, len });
        }
        cells.sort_unstable();
        cells.dedup();
        Ok(CellSet { space, cells })
    }

    pub(crate) fn from_sorted(space: GridSpace, cells: Vec<usize>) -> Self {
        debug_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        CellSet { space, cells }
    }

    pub fn empty(space: GridSpace) -> Self {
        CellSet { space, cells: Vec::new() }
    }

    pub fn full(space: GridSpace) -> Self {
        CellSet { space, cells: (0..space.len()).collect() }
    }

    pub fn from_mask(space: GridSpace, mask: &[bool]) -> Self {
        assert_eq!(mask.len(), space.len());
        CellSet { space, cells: (0..mask.len()).filter(|&i| mask[i]).collect() }
    }

    pub fn from_predicate(space: GridSpace, mut f: impl FnMut(usize) -> bool) -> Self {
        CellSet { space, cells: (0..space.len()).filter(|&i| f(i)).collect() }
    }

    pub fn space(&self) -> &GridSpace {
        &self.space
    }
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }
    pub fn len(&self) -> usize {
        self.cells.len()
    }
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().copied()
    }
    pub fn contains(&self, idx: usize) -> bool {
        self.cells.binary_search(&idx).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.space.len()];
        for &c in &self.cells {
            m[c] = true;
        }
        m
    }

    fn check_space(&self, other: &CellSet) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.check_space(other)?;
        let mut v = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.cells.len() || j < other.cells.len() {
            let a = self.cells.get(i).copied().unwrap_or(usize::MAX);
            let b = other.cells.get(j).copied().unwrap_or(usize::MAX);
            v.push(a.min(b));
            if a <= b {
                i += 1;
            }
            if b <= a {
                j += 1;
            }
        }
        Ok(CellSet::from_sorted(self.space, v))
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        self.check_space(other)?;
        let v = self.cells.iter().copied().filter(|&c| other.contains(c)).collect();
        Ok(CellSet::from_sorted(self.space, v))
    }

    pub fn difference(&self, other: &CellSet) -> Result<CellSet> {
        self.check_space(other)?;
        let v = self.cells.iter().copied().filter(|&c| !other.contains(c)).collect();
        Ok(CellSet::from_sorted(self.space, v))
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.space == other.space && self.cells.iter().all(|&c| other.contains(c))
    }

    pub fn intersects(&self, other: &CellSet) -> bool {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.cells.iter().any(|&c| big.contains(c))
    }

    /// Cells within `k` eight-steps of the set.
    pub fn dilate(&self, k: usize) -> CellSet {
        let mut mask = self.mask();
        let mut frontier = self.cells.clone();
        for _ in 0..k {
            let mut next = Vec::new();
            for &c in &frontier {
                for n in self.space.neighbors8(c) {
                    if !mask[n] {
                        mask[n] = true;
                        next.push(n);
                    }
                }
            }
            frontier = next;
        }
        CellSet::from_mask(self.space, &mask)
    }

    /// Small relative to its space: whole-space masks cost more than lookups.
    pub(crate) fn is_sparse(&self) -> bool {
        self.cells.len() * 64 < self.space.len()
    }

    pub fn is_connected(&self) -> bool {
        !self.is_empty() && components(self).len() == 1
    }
}

/// A nonempty eight-connected cell set.
#[derive(Clone, Debug, PartialEq)]
pub struct Continuum(CellSet);

impl Continuum {
    pub fn new(set: CellSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet("continuum"));
        }
        let n = components(&set).len();
        if n != 1 {
            return Err(Error::NotConnected(n));
        }
        Ok(Continuum(set))
    }

    pub fn into_inner(self) -> CellSet {
        self.0
    }
}

impl std::ops::Deref for Continuum {
    type Target = CellSet;
    fn deref(&self) -> &CellSet {
        &self.0
    }
}

/// Maximal eight-connected pieces, ordered by lowest cell index.
pub fn components(s: &CellSet) -> Vec<Continuum> {
    let space = s.space;
    if s.is_sparse() {
        let mut left: std::collections::HashSet<usize> = s.cells.iter().copied().collect();
        let mut out = Vec::new();
        for &start in &s.cells {
            if !left.remove(&start) {
                continue;
            }
            let mut comp = vec![start];
            let mut i = 0;
            while i < comp.len() {
                for n in space.neighbors8(comp[i]) {
                    if left.remove(&n) {
                        comp.push(n);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(Continuum(CellSet::from_sorted(space, comp)));
        }
        return out;
    }
    let mut mark = vec![0u8; space.len()];
    for &c in &s.cells {
        mark[c] = 1;
    }
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for &start in &s.cells {
        if mark[start] != 1 {
            continue;
        }
        mark[start] = 2;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(c) = queue.pop_front() {
            comp.push(c);
            for n in space.neighbors8(c) {
                if mark[n] == 1 {
                    mark[n] = 2;
                    queue.push_back(n);
                }
            }
        }
        comp.sort_unstable();
        out.push(Continuum(CellSet::from_sorted(space, comp)));
    }
    out
}

/// Squared distance field to a set, in squared cell units.
#[derive(Clone, Debug)]
pub struct DistanceField {
    space: GridSpace,
    d2: Vec<u64>,
}

impl DistanceField {
    pub fn space(&self) -> &GridSpace {
        &self.space
    }
    pub fn squared_cells(&self, idx: usize) -> u64 {
        self.d2[idx]
    }
    pub fn get(&self, idx: usize) -> f64 {
        (self.d2[idx] as f64).sqrt() * self.space.cell_size()
    }
    pub fn values(&self) -> Vec<f64> {
        (0..self.d2.len()).map(|i| self.get(i)).collect()
    }
    pub fn max_over(&self, s: &CellSet) -> u64 {
        s.iter().map(|c| self.d2[c]).max().unwrap_or(0)
    }
}

const INF: f64 = f64::INFINITY;

/// Lower envelope of parabolas (Felzenszwalb–Huttenlocher); `f` may hold INF.
fn edt_line(f: &[f64], out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    v.clear();
    z.clear();
    for q in 0..f.len() {
        if f[q] == INF {
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(-INF);
                    break;
                }
                Some(&p) => {
                    let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out.iter_mut().for_each(|o| *o = INF);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Separable pass over a `w×h` grid; periodic lines are triplicated.
fn edt_grid(field: &mut [f64], w: usize, h: usize, periodic: bool) {
    let mut v = Vec::new();
    let mut z = Vec::new();
    let mut pass = |len: usize, count: usize, at: &dyn Fn(usize, usize) -> usize, field: &mut [f64]| {
        let reps = if periodic { 3 } else { 1 };
        let mut line = vec![0.0; len * reps];
        let mut out = vec![0.0; len * reps];
        for l in 0..count {
            for r in 0..reps {
                for i in 0..len {
                    line[r * len + i] = field[at(l, i)];
                }
            }
            edt_line(&line, &mut out, &mut v, &mut z);
            let base = if periodic { len } else { 0 };
            for i in 0..len {
                field[at(l, i)] = out[base + i];
            }
        }
    };
    pass(h, w, &|col, row| row * w + col, field);
    pass(w, h, &|row, col| row * w + col, field);
}

pub fn distance_transform(s: &CellSet) -> Result<DistanceField> {
    if s.is_empty() {
        return Err(Error::EmptySet("distance transform"));
    }
    let space = s.space;
    let d2 = match space.kind {
        SpaceKind::Rectangle { .. } | SpaceKind::Torus => {
            let mut f = vec![INF; space.len()];
            for &c in &s.cells {
                f[c] = 0.0;
            }
            edt_grid(&mut f, space.width, space.height, !space.is_rectangle());
            f.into_iter().map(|x| x as u64).collect()
        }
        SpaceKind::SphereQuotient => {
            // lift to the double cover, which is a torus
            let n = space.resolution as usize;
            let mut f = vec![INF; n * n];
            for &c in &s.cells {
                let (col, row) = space.col_row(c);
                f[row * n + col] = 0.0;
                f[(n - 1 - row) * n + (n - 1 - col)] = 0.0;
            }
            edt_grid(&mut f, n, n, true);
            f.truncate(space.len());
            f.into_iter().map(|x| x as u64).collect()
        }
    };
    Ok(DistanceField { space, d2 })
}

/// sup over `a ∈ A` of dist(a, B).
pub fn directed_hausdorff(a: &CellSet, b: &CellSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("Hausdorff distance"));
    }
    a.check_space(b)?;
    let db = distance_transform(b)?;
    Ok((db.max_over(a) as f64).sqrt() * a.space.cell_size())
}

pub fn hausdorff_distance(a: &CellSet, b: &CellSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("Hausdorff distance"));
    }
    a.check_space(b)?;
    let da = distance_transform(a)?;
    let db = distance_transform(b)?;
    let m = db.max_over(a).max(da.max_over(b));
    Ok((m as f64).sqrt() * a.space.cell_size())
}

const HULL_THRESHOLD: usize = 64;

fn hull_cells(s: &CellSet) -> Vec<usize> {
    let space = s.space;
    let mut pts: Vec<(i64, i64, usize)> = s
        .iter()
        .map(|c| {
            let (x, y) = space.col_row(c);
            (x as i64, y as i64, c)
        })
        .collect();
    pts.sort_unstable();
    if pts.len() < 3 {
        return pts.into_iter().map(|p| p.2).collect();
    }
    let cross = |o: (i64, i64, usize), a: (i64, i64, usize), b: (i64, i64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(i64, i64, usize)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull.into_iter().map(|p| p.2).collect()
}

pub fn diameter(s: &CellSet) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptySet("diameter"));
    }
    let space = s.space;
    let cand: Vec<usize> = if space.is_rectangle() && s.len() > HULL_THRESHOLD {
        hull_cells(s)
    } else {
        s.cells.clone()
    };
    let mut m = 0;
    for (i, &a) in cand.iter().enumerate() {
        for &b in &cand[i + 1..] {
            m = m.max(space.dist2_cells(a, b));
        }
    }
    Ok((m as f64).sqrt() * space.cell_size())
}

/// μ(A) = mean over all cells x of (max_a d(x,a) − min_a d(x,a)).
pub fn whitney_size(a: &CellSet) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptySet("size"));
    }
    let space = a.space;
    let near = distance_transform(a)?;
    let far_cand: Vec<usize> = if space.is_rectangle() && a.len() > 8 { hull_cells(a) } else { a.cells.clone() };
    let mut sum = 0.0;
    for x in 0..space.len() {
        let far = far_cand.iter().map(|&c| space.dist2_cells(x, c)).max().unwrap();
        sum += (far as f64).sqrt() - (near.squared_cells(x) as f64).sqrt();
    }
    Ok(sum * space.cell_size() / space.len() as f64)
}

/// Incremental Whitney size for sets grown and shrunk one cell at a time
/// (depth-first walks over a tree of cells).
pub struct WhitneyAccumulator {
    space: GridSpace,
    far: Vec<f64>,
    near: Vec<f64>,
    sum: f64,
    undo: Vec<Vec<(u32, f64, f64)>>,
}

impl WhitneyAccumulator {
    pub fn new(space: GridSpace) -> Self {
        let n = space.len();
        WhitneyAccumulator { space, far: vec![-1.0; n], near: vec![INF; n], sum: 0.0, undo: Vec::new() }
    }

    pub fn push(&mut self, cell: usize) {
        let mut log = Vec::new();
        let first = self.undo.is_empty();
        for x in 0..self.space.len() {
            let d = (self.space.dist2_cells(x, cell) as f64).sqrt();
            let (f, n) = (self.far[x], self.near[x]);
            if d > f || d < n {
                log.push((x as u32, f, n));
                let nf = f.max(d);
                let nn = n.min(d);
                if !first {
                    self.sum += (nf - nn) - (f - n);
                }
                self.far[x] = nf;
                self.near[x] = nn;
            }
        }
        self.undo.push(log);
    }

    pub fn pop(&mut self) {
        if let Some(log) = self.undo.pop() {
            let last = self.undo.is_empty();
            for (x, f, n) in log.into_iter().rev() {
                let x = x as usize;
                if !last {
                    self.sum -= (self.far[x] - self.near[x]) - (f - n);
                }
                self.far[x] = f;
                self.near[x] = n;
            }
            if last {
                self.sum = 0.0;
            }
        }
    }

    pub fn value(&self) -> f64 {
        self.sum.max(0.0) * self.space.cell_size() / self.space.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_hausdorff(a: &CellSet, b: &CellSet) -> f64 {
        let s = a.space();
        let dir = |p: &CellSet, q: &CellSet| {
            p.iter().map(|x| q.iter().map(|y| s.dist2_cells(x, y)).min().unwrap()).max().unwrap()
        };
        (dir(a, b).max(dir(b, a)) as f64).sqrt() * s.cell_size()
    }

    #[test]
    fn sphere_neighbors_are_symmetric() {
        let s = GridSpace::sphere(16).unwrap();
        for i in 0..s.len() {
            for n in s.neighbors8(i) {
                assert!(s.neighbors8(n).contains(&i), "{i} -> {n}");
                assert!(s.dist2_cells(i, n) <= 2);
            }
        }
    }

    #[test]
    fn cell_at_inverts_center() {
        for s in [GridSpace::torus(16).unwrap(), GridSpace::sphere(16).unwrap()] {
            for i in 0..s.len() {
                assert_eq!(s.cell_at(s.center(i)), Some(i));
            }
        }
        let s = GridSpace::sphere(16).unwrap();
        let a = s.cell_at((0.3, 0.2)).unwrap();
        assert_eq!(s.cell_at((-0.3, -0.2)), Some(a));
        assert_eq!(s.cell_at((0.7, 0.8)), Some(a));
    }

    #[test]
    fn singleton_hausdorff() {
        let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 10).unwrap();
        let a = CellSet::new(s, [s.cell_at((0.05, 0.05)).unwrap()]).unwrap();
        let b = CellSet::new(s, [s.cell_at((0.35, 0.45)).unwrap()]).unwrap();
        assert!((hausdorff_distance(&a, &b).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert!(hausdorff_distance(&a, &CellSet::empty(s)).is_err());
    }

    #[test]
    fn distance_transform_matches_brute_force_on_all_kinds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let spaces = [
            GridSpace::rectangle(0.0, 1.0, 0.0, 0.75, 32).unwrap(),
            GridSpace::torus(32).unwrap(),
            GridSpace::sphere(32).unwrap(),
        ];
        for s in spaces {
            for _ in 0..10 {
                let k = rng.gen_range(1..20);
                let set = CellSet::new(s, (0..k).map(|_| rng.gen_range(0..s.len()))).unwrap();
                let dt = distance_transform(&set).unwrap();
                for x in 0..s.len() {
                    let b = set.iter().map(|c| s.dist2_cells(x, c)).min().unwrap();
                    assert_eq!(dt.squared_cells(x), b);
                }
                let other = CellSet::new(s, (0..k + 3).map(|_| rng.gen_range(0..s.len()))).unwrap();
                assert_eq!(hausdorff_distance(&set, &other).unwrap(), brute_hausdorff(&set, &other));
            }
        }
    }

    #[test]
    fn diameter_of_run_and_hull() {
        let s = GridSpace::rectangle(0.0, 2.0, 0.0, 2.0, 32).unwrap();
        let run = CellSet::new(s, (0..10).map(|c| s.index(c + 3, 7))).unwrap();
        assert!((diameter(&run).unwrap() - 9.0 / 32.0).abs() < 1e-12);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let set = CellSet::new(s, (0..200).map(|_| rng.gen_range(0..s.len()))).unwrap();
            let mut m = 0;
            for a in set.iter() {
                for b in set.iter() {
                    m = m.max(s.dist2_cells(a, b));
                }
            }
            assert_eq!(diameter(&set).unwrap(), (m as f64).sqrt() / 32.0);
        }
    }

    #[test]
    fn periodic_diameters() {
        let t = GridSpace::torus(16).unwrap();
        let d = diameter(&CellSet::full(t)).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
        let sp = GridSpace::sphere(16).unwrap();
        let d = diameter(&CellSet::full(sp)).unwrap();
        assert!(d <= 0.5f64.sqrt() + 1e-12 && d >= 0.5f64.sqrt() - sp.cell_size());
    }

    #[test]
    fn components_split_and_order() {
        let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 16).unwrap();
        let set = CellSet::new(s, [s.index(5, 5), s.index(1, 1), s.index(2, 2)]).unwrap();
        let comps = components(&set);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].cells(), &[s.index(1, 1), s.index(2, 2)]);
        assert!(components(&CellSet::empty(s)).is_empty());
    }

    #[test]
    fn accumulator_matches_direct() {
        let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 16).unwrap();
        let mut acc = WhitneyAccumulator::new(s);
        let path: Vec<usize> = (0..8).map(|i| s.index(i + 2, 3 + i / 2)).collect();
        for (k, &c) in path.iter().enumerate() {
            acc.push(c);
            let direct = whitney_size(&CellSet::new(s, path[..=k].iter().copied()).unwrap()).unwrap();
            assert!((acc.value() - direct).abs() < 1e-12);
        }
        for k in (1..path.len()).rev() {
            acc.pop();
            let direct = whitney_size(&CellSet::new(s, path[..k].iter().copied()).unwrap()).unwrap();
            assert!((acc.value() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn whitney_full_grid_regression() {
        let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 16).unwrap();
        let full = CellSet::full(s);
        let mut direct = 0.0;
        for x in 0..s.len() {
            let far = full.iter().map(|a| s.metric(x, a)).fold(0.0, f64::max);
            direct += far;
        }
        direct /= s.len() as f64;
        let mu = whitney_size(&full).unwrap();
        assert!((mu - direct).abs() < 1e-12);
        assert!((mu - 1.026_513_632_894_229_7).abs() < 1e-9, "{mu}");
    }
}
