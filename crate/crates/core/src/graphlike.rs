//! Graph-like continua in a rectangle, the decomposition induced by the
//! vertical flow with speed `dist(p, C)`, and generators for the example
//! continua.

use serde::{Deserialize, Serialize};

use crate::decomposition::{find_solid_block, LabelField};
use crate::error::{Error, Result};
use crate::geometry::{components, distance_transform, CellSet, GridSpace};

/// Arrival times are clamped here; reaching it is reported on the decomposition.
pub const T_CAP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphlikeVerdict {
    pub ok: bool,
    pub column: Option<usize>,
    pub reason: Option<String>,
}

impl GraphlikeVerdict {
    fn fail(column: Option<usize>, reason: impl Into<String>) -> Self {
        GraphlikeVerdict { ok: false, column, reason: Some(reason.into()) }
    }
}

/// Checks that every column slice is one nonempty vertical run, that
/// neighbouring slices share a row, that the set avoids the top and bottom
/// rows, and that it has no 3×3 block.
pub fn validate_graphlike(c: &CellSet) -> GraphlikeVerdict {
    let space = c.space();
    if !space.is_rectangle() {
        return GraphlikeVerdict::fail(None, "not a rectangle space");
    }
    let slices = match column_slices(c) {
        Ok(s) => s,
        Err((col, why)) => return GraphlikeVerdict::fail(Some(col), why),
    };
    for (col, &(lo, hi)) in slices.iter().enumerate() {
        if lo == 0 || hi + 1 == space.height() {
            return GraphlikeVerdict::fail(Some(col), "touches the top or bottom row");
        }
        if col > 0 {
            let (plo, phi) = slices[col - 1];
            if lo.max(plo) > hi.min(phi) {
                return GraphlikeVerdict::fail(Some(col), "shares no row with the previous column");
            }
        }
    }
    if let Some(cell) = find_solid_block(c, 3) {
        return GraphlikeVerdict::fail(Some(space.col_row(cell).0), "has interior (3×3 block)");
    }
    GraphlikeVerdict { ok: true, column: None, reason: None }
}

fn column_slices(c: &CellSet) -> std::result::Result<Vec<(usize, usize)>, (usize, String)> {
    let space = c.space();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); space.width()];
    for cell in c.iter() {
        let (col, row) = space.col_row(cell);
        rows[col].push(row);
    }
    rows.iter()
        .enumerate()
        .map(|(col, r)| {
            let (Some(&lo), Some(&hi)) = (r.iter().min(), r.iter().max()) else {
                return Err((col, "empty slice".to_string()));
            };
            if hi - lo + 1 != r.len() {
                return Err((col, "slice is not connected".to_string()));
            }
            Ok((lo, hi))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphLikeContinuum {
    cells: CellSet,
    slices: Vec<(usize, usize)>,
}

impl GraphLikeContinuum {
    pub fn new(cells: CellSet) -> Result<Self> {
        let v = validate_graphlike(&cells);
        if !v.ok {
            return Err(Error::Precondition(format!(
                "not graph-like at column {:?}: {}",
                v.column,
                v.reason.unwrap_or_default()
            )));
        }
        let slices = column_slices(&cells).expect("validated");
        Ok(GraphLikeContinuum { cells, slices })
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }
    pub fn space(&self) -> &GridSpace {
        self.cells.space()
    }
    /// Lowest and highest row of the slice in `col`.
    pub fn slice(&self, col: usize) -> (usize, usize) {
        self.slices[col]
    }
}

#[derive(Clone, Debug)]
pub struct FlowDecomposition {
    pub source: GraphLikeContinuum,
    /// Arrival time at the exit boundary; infinite on C.
    pub t_field: Vec<f64>,
    pub field: LabelField,
    pub upper_bands: usize,
    pub lower_bands: usize,
    pub capped: bool,
}

impl FlowDecomposition {
    pub fn t(&self, cell: usize) -> f64 {
        self.t_field[cell]
    }
    /// Plaque id of C itself.
    pub fn c_plaque(&self) -> usize {
        self.field.label(self.source.cells().cells()[0]).unwrap()
    }
}

/// Splits columns of increasing arrival times into bands. A band takes the
/// cells below a common level τ in every column; τ is the smallest level for
/// which every column gets a cell and neighbouring columns share a row. Cells
/// left over once some column runs out join the last band.
fn level_bands(cols: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = cols.len();
    let mut band: Vec<Vec<usize>> = cols.iter().map(|c| vec![usize::MAX; c.len()]).collect();
    let mut p = vec![0usize; n];
    let mut b = 0usize;
    'outer: loop {
        if (0..n).any(|c| p[c] >= cols[c].len()) {
            break;
        }
        let mut tau = (0..n).map(|c| cols[c][p[c]]).fold(f64::NEG_INFINITY, f64::max);
        let mut e = vec![0usize; n];
        loop {
            for c in 0..n {
                e[c] = cols[c].partition_point(|&t| t <= tau);
            }
            let mut raise = None;
            for c in 0..n.saturating_sub(1) {
                let top = p[c].max(p[c + 1]);
                if top >= e[c].min(e[c + 1]) {
                    let k = if e[c] <= e[c + 1] { c } else { c + 1 };
                    if top >= cols[k].len() {
                        break 'outer;
                    }
                    raise = Some(cols[k][top]);
                    break;
                }
            }
            match raise {
                Some(t) => tau = tau.max(t),
                None => break,
            }
        }
        for c in 0..n {
            for d in p[c]..e[c] {
                band[c][d] = b;
            }
            p[c] = e[c];
        }
        b += 1;
    }
    let last = b.saturating_sub(1);
    for c in 0..n {
        for d in p[c]..cols[c].len() {
            band[c][d] = last;
        }
    }
    band
}

pub fn flow_decomposition(c: &GraphLikeContinuum) -> Result<FlowDecomposition> {
    let space = *c.space();
    let (w, h) = (space.width(), space.height());
    let hs = space.cell_size();
    let dt = distance_transform(c.cells())?;
    let dist = |cell: usize| (dt.squared_cells(cell) as f64).sqrt() * hs;
    let mut t_field = vec![f64::INFINITY; space.len()];
    let mut capped = false;
    let mut up_cols = Vec::with_capacity(w);
    let mut down_cols = Vec::with_capacity(w);
    for col in 0..w {
        let (lo, hi) = c.slice(col);
        // upward: depth 0 is the top row
        let mut ts = Vec::new();
        let mut t = 0.0;
        for (k, row) in (hi + 1..h).rev().enumerate() {
            if k > 0 {
                let prev = space.index(col, row + 1);
                t += 0.5 * hs * (1.0 / dist(prev) + 1.0 / dist(space.index(col, row)));
            }
            if t > T_CAP {
                t = T_CAP;
                capped = true;
            }
            t_field[space.index(col, row)] = t;
            ts.push(t);
        }
        up_cols.push(ts);
        let mut ts = Vec::new();
        let mut t = 0.0;
        for row in 0..lo {
            if row > 0 {
                let prev = space.index(col, row - 1);
                t += 0.5 * hs * (1.0 / dist(prev) + 1.0 / dist(space.index(col, row)));
            }
            if t > T_CAP {
                t = T_CAP;
                capped = true;
            }
            t_field[space.index(col, row)] = t;
            ts.push(t);
        }
        down_cols.push(ts);
    }
    let up = level_bands(&up_cols);
    let down = level_bands(&down_cols);
    let upper_bands = up.iter().flatten().max().map_or(0, |m| m + 1);
    let lower_bands = down.iter().flatten().max().map_or(0, |m| m + 1);
    let mut key = vec![(0u8, 0usize); space.len()];
    for col in 0..w {
        let (lo, hi) = c.slice(col);
        for (d, row) in (hi + 1..h).rev().enumerate() {
            key[space.index(col, row)] = (1, up[col][d]);
        }
        for row in 0..lo {
            key[space.index(col, row)] = (2, down[col][row]);
        }
    }
    let field = LabelField::from_keys(&CellSet::full(space), |cell| key[cell]);
    Ok(FlowDecomposition { source: c.clone(), t_field, field, upper_bands, lower_bands, capped })
}

impl FlowDecomposition {
    /// Cells of C touching the region above C and the region below C.
    pub fn contact_sets(&self) -> (CellSet, CellSet) {
        let space = *self.source.space();
        let c = self.source.cells();
        let touches = |upper: bool| {
            CellSet::from_predicate(space, |cell| {
                c.contains(cell)
                    && space.neighbors8(cell).into_iter().any(|n| {
                        !c.contains(n) && {
                            let (col, row) = space.col_row(n);
                            (row > self.source.slice(col).1) == upper
                        }
                    })
            })
        };
        (touches(true), touches(false))
    }

    /// Hausdorff distance between the upper and lower contact sets; small
    /// exactly when the decomposition is continuous along C.
    pub fn contact_mismatch(&self) -> Result<f64> {
        let (up, down) = self.contact_sets();
        crate::geometry::hausdorff_distance(&up, &down)
    }
}

fn row_of(space: &GridSpace, y: f64) -> usize {
    let (_, y0) = space.center(0);
    ((y - y0) / space.cell_size()).round().clamp(0.0, (space.height() - 1) as f64) as usize
}

fn col_of(space: &GridSpace, x: f64) -> usize {
    let (x0, _) = space.center(0);
    ((x - x0) / space.cell_size()).round().clamp(0.0, (space.width() - 1) as f64) as usize
}

fn from_slices(space: GridSpace, slices: &[(usize, usize)]) -> Result<GraphLikeContinuum> {
    let mut cells = Vec::new();
    for (col, &(lo, hi)) in slices.iter().enumerate() {
        cells.extend((lo..=hi).map(|r| space.index(col, r)));
    }
    GraphLikeContinuum::new(CellSet::new(space, cells)?)
}

/// `C = I×{0}` in `[0,1]×[-1,1]`.
pub fn make_horizontal_segment(res: u32) -> Result<GraphLikeContinuum> {
    let space = GridSpace::vertex_centered(0.0, 1.0, -1.0, 1.0, res)?;
    let r0 = row_of(&space, 0.0);
    from_slices(space, &vec![(r0, r0); space.width()])
}

/// `C = [-1,1]×{0} ∪ {0}×[0,1/2]` in `[-1,1]²`.
pub fn make_cocarc(res: u32) -> Result<GraphLikeContinuum> {
    let space = GridSpace::vertex_centered(-1.0, 1.0, -1.0, 1.0, res)?;
    let r0 = row_of(&space, 0.0);
    let mut slices = vec![(r0, r0); space.width()];
    slices[col_of(&space, 0.0)] = (r0, row_of(&space, 0.5));
    from_slices(space, &slices)
}

/// Range of `sin(1/x)` over `[a, b]` with `0 < a < b`.
fn sin_inv_range(a: f64, b: f64) -> (f64, f64) {
    let (u0, u1) = (1.0 / b, 1.0 / a);
    let (f0, f1) = (u0.sin(), u1.sin());
    let (mut lo, mut hi) = (f0.min(f1), f0.max(f1));
    let tau = std::f64::consts::TAU;
    let half = std::f64::consts::FRAC_PI_2;
    if ((u1 - half) / tau).floor() >= ((u0 - half) / tau).ceil() {
        hi = 1.0;
    }
    if ((u1 - 3.0 * half) / tau).floor() >= ((u0 - 3.0 * half) / tau).ceil() {
        lo = -1.0;
    }
    (lo, hi)
}

fn has_block_near(slices: &[(usize, usize)], col: usize) -> bool {
    let lo = col.saturating_sub(2);
    let hi = (col + 2).min(slices.len() - 1);
    (lo..=hi.saturating_sub(2)).any(|c| {
        let a = slices[c].0.max(slices[c + 1].0).max(slices[c + 2].0);
        let b = slices[c].1.min(slices[c + 1].1).min(slices[c + 2].1);
        b >= a + 2
    })
}

/// `C = {0}×[-1,1] ∪ {(x, sin(1/x)) : 0 < |x| ≤ 2}` in `[-2,2]²`.
///
/// Near `x = 0` the oscillation is not resolvable and column-run completion
/// would fill solid blocks. Columns closer to the axis than the last block
/// are replaced by a triangle wave of full amplitude that takes three columns
/// per half period and joins the true curve continuously.
pub fn make_sin_one_over_x(res: u32) -> Result<GraphLikeContinuum> {
    let space = GridSpace::vertex_centered(-2.0, 2.0, -2.0, 2.0, res)?;
    let hs = space.cell_size();
    let c0 = col_of(&space, 0.0);
    let w = space.width();
    let rows = |lo: f64, hi: f64| (row_of(&space, lo), row_of(&space, hi));
    // right half, mirrored below: column k ≥ 1 spans x ∈ [(k-½)h, (k+½)h]
    let half_cols = w - 1 - c0;
    let true_ranges: Vec<(f64, f64)> =
        (1..=half_cols).map(|k| sin_inv_range((k as f64 - 0.5) * hs, (k as f64 + 0.5) * hs)).collect();
    let build = |junction: usize| -> Vec<(f64, f64)> {
        let mut out = true_ranges.clone();
        if junction > 0 {
            let vj = (1.0 / ((junction as f64 + 0.5) * hs)).sin();
            let slope = (2.0 / 3.0) / hs;
            for k in 1..=junction {
                out[k - 1] = column_wave(vj, slope, (junction - k) as f64 * hs, hs);
            }
        }
        out
    };
    let assemble = |ranges: &[(f64, f64)]| -> Vec<(usize, usize)> {
        let mut slices = vec![(0, 0); w];
        slices[c0] = rows(-1.0, 1.0);
        for (k, &(lo, hi)) in ranges.iter().enumerate() {
            slices[c0 + 1 + k] = rows(lo, hi);
            slices[c0 - 1 - k] = rows(-hi, -lo);
        }
        slices
    };
    let blocked = |slices: &[(usize, usize)]| (c0..w).rev().find(|&col| has_block_near(slices, col));
    let mut slices = assemble(&build(0));
    // the wave phase near the axis depends on the junction; move it outwards
    // until no three neighbouring columns share three rows
    if let Some(col) = blocked(&slices) {
        for junction in col - c0..=half_cols {
            slices = assemble(&build(junction));
            if blocked(&slices).is_none() {
                break;
            }
        }
    }
    from_slices(space, &slices)
}

/// Range over one column of a wave that starts at value `vj` on the junction
/// boundary and runs leftwards: the column covers distances `[start, start+h]`.
fn column_wave(vj: f64, slope: f64, start: f64, h: f64) -> (f64, f64) {
    let wave = |x: f64| {
        let u = (vj + 1.0 + slope * x).rem_euclid(4.0);
        if u <= 2.0 { u - 1.0 } else { 3.0 - u }
    };
    let (a, b) = (wave(start), wave(start + h));
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let (u0, u1) = (vj + 1.0 + slope * start, vj + 1.0 + slope * (start + h));
    if ((u1 - 2.0) / 4.0).floor() >= ((u0 - 2.0) / 4.0).ceil() {
        hi = 1.0;
    }
    if (u1 / 4.0).floor() >= (u0 / 4.0).ceil() {
        lo = -1.0;
    }
    (lo, hi)
}

/// Whether `num/den` lies in the ternary Cantor set to `depth` digits.
pub fn in_cantor(num: u64, den: u64, depth: u32) -> bool {
    if num > den {
        return false;
    }
    let mut n = num;
    for _ in 0..depth {
        let t = 3 * n;
        let (digit, rem) = (t / den, t % den);
        if digit == 1 {
            return rem == 0;
        }
        if digit >= 3 {
            return true;
        }
        n = rem;
    }
    true
}

/// `C = (K×[1/3,2/3]) ∪ ([0,1]×{1/3})` in `[0,1]²`, with `K` the ternary
/// Cantor set to depth `⌈log₃ res⌉`; a column belongs to `K` when its center does.
pub fn make_cantor_square(res: u32) -> Result<GraphLikeContinuum> {
    let space = GridSpace::vertex_centered(0.0, 1.0, 0.0, 1.0, res)?;
    let depth = (res as f64).log(3.0).ceil() as u32;
    let (base, top) = (row_of(&space, 1.0 / 3.0), row_of(&space, 2.0 / 3.0));
    let slices: Vec<(usize, usize)> = (0..space.width())
        .map(|col| if in_cantor(col as u64, res as u64, depth) { (base, top) } else { (base, base) })
        .collect();
    from_slices(space, &slices)
}

/// `g(Σ 2/3^{n_i}) = Σ 1/2^{n_i}` on the Cantor set, to 40 ternary digits.
pub fn ternary_binary_map(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Precondition(format!("{x} is outside [0, 1]")));
    }
    let mut r = x;
    let mut g = 0.0;
    let mut weight = 1.0;
    for n in 1..=40 {
        // rounding error grows by a factor of three per digit
        let tol = 1e-12 * 3f64.powi(n);
        if tol > 1e-3 {
            break;
        }
        weight *= 0.5;
        let t = 3.0 * r;
        let k = t.round();
        if (t - k).abs() < tol {
            // terminating expansion: the rest is all zeros or, after a digit 1
            // or 3, the equivalent tail of twos
            match k as i64 {
                0 => return Ok(g),
                1 | 2 => return Ok(g + weight),
                _ => return Ok(g + 2.0 * weight),
            }
        }
        let d = t.floor();
        if d == 1.0 {
            return Err(Error::Precondition(format!("ternary digit 1 at position {n}")));
        }
        if d == 2.0 {
            g += weight;
        }
        r = t - d;
    }
    Ok(g)
}

/// Cells whose centers lie within `h/√2` of the segment `a`–`b`.
pub fn rasterize_segment(space: &GridSpace, a: (f64, f64), b: (f64, f64)) -> Vec<usize> {
    let hs = space.cell_size();
    let tol = hs / std::f64::consts::SQRT_2 + 1e-12;
    let (c0, c1) = (col_of(space, a.0.min(b.0) - hs), col_of(space, a.0.max(b.0) + hs));
    let (r0, r1) = (row_of(space, a.1.min(b.1) - hs), row_of(space, a.1.max(b.1) + hs));
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let mut out = Vec::new();
    for row in r0..=r1 {
        for col in c0..=c1 {
            let cell = space.index(col, row);
            let (px, py) = space.center(cell);
            let t = if len2 > 0.0 { (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
            if (px - qx).hypot(py - qy) <= tol {
                out.push(cell);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackgammonSegment {
    /// Base point `(a, 0)`.
    pub a: f64,
    /// Top point `(g(a), 1)`.
    pub g: f64,
    /// `g(a)·2^depth`, shared exactly by the two ends of a removed gap.
    pub fiber: u64,
}

#[derive(Clone, Debug)]
pub struct Backgammon {
    pub x: CellSet,
    /// One plaque on `X ∩ {y < 2/3}`.
    pub q_u: LabelField,
    /// `cc_p(J_p ∩ V)` on `X ∩ {y > 1/3}`.
    pub q_v: LabelField,
    pub segments: Vec<BackgammonSegment>,
    pub depth: u32,
}

/// `X = [0,1]×{0} ∪ ⋃ I_a ∪ [0,1]×{1}` where `I_a` joins `(a,0)` to `(g(a),1)`
/// for the interval endpoints `a` of the Cantor set at `depth`. The top row is
/// the closure of the segment tops.
pub fn make_backgammon(res: u32, depth: u32) -> Result<Backgammon> {
    let space = GridSpace::vertex_centered(0.0, 1.0, 0.0, 1.0, res)?;
    let scale = 1u64 << depth;
    // interval endpoints with exact dyadic g values
    let mut ends: Vec<(f64, u64)> = Vec::new();
    fn walk(l: f64, r: f64, gl: u64, gr: u64, d: u32, out: &mut Vec<(f64, u64)>) {
        if d == 0 {
            out.push((l, gl));
            out.push((r, gr));
            return;
        }
        let w = (r - l) / 3.0;
        let gm = (gl + gr) / 2;
        walk(l, l + w, gl, gm, d - 1, out);
        walk(r - w, r, gm, gr, d - 1, out);
    }
    walk(0.0, 1.0, 0, scale, depth, &mut ends);
    let segments: Vec<BackgammonSegment> =
        ends.iter().map(|&(a, f)| BackgammonSegment { a, g: f as f64 / scale as f64, fiber: f }).collect();
    let hs = space.cell_size();
    let mut owner: Vec<Option<(f64, u64)>> = vec![None; space.len()];
    let mut mask = vec![false; space.len()];
    for s in &segments {
        let (a, b) = ((s.a, 0.0), (s.g, 1.0));
        for cell in rasterize_segment(&space, a, b) {
            mask[cell] = true;
            let (px, py) = space.center(cell);
            // distance to the segment's line, for nearest-segment ownership
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let d = ((px - a.0) * dy - (py - a.1) * dx).abs() / dx.hypot(dy);
            if owner[cell].is_none_or(|(od, of)| (d, s.fiber) < (od - 1e-12 * hs, of)) {
                owner[cell] = Some((d, s.fiber));
            }
        }
    }
    let (bottom, top) = (row_of(&space, 0.0), row_of(&space, 1.0));
    for col in 0..space.width() {
        mask[space.index(col, bottom)] = true;
        mask[space.index(col, top)] = true;
    }
    let x = CellSet::from_mask(space, &mask);
    let u = CellSet::from_predicate(space, |c| mask[c] && space.center(c).1 < 2.0 / 3.0);
    let v = CellSet::from_predicate(space, |c| mask[c] && space.center(c).1 > 1.0 / 3.0);
    let q_u = LabelField::from_keys(&u, |_| 0u64);
    // top-row cells between segment tops join the fibre of the nearest top
    let nearest_top = |px: f64| {
        segments.iter().min_by(|a, b| (a.g - px).abs().total_cmp(&(b.g - px).abs()).then(a.fiber.cmp(&b.fiber))).unwrap().fiber
    };
    let q_v = LabelField::from_keys(&v, |c| match owner[c] {
        Some((_, f)) => f,
        None => nearest_top(space.center(c).0),
    });
    Ok(Backgammon { x, q_u, q_v, segments, depth })
}

/// The anomalous stable set `F^s = (ℝ×{0}) ∪ ⋃_{n≥0} T^n(E)` with
/// `E = ({1} ∪ {1+1/m}_{m≥2})×[0,1]` and `T(p) = p/2`, clipped to
/// `[-0.5,2.5]×[-0.5,1.5]`. Segments are kept while they stand at least three
/// cells apart from their neighbours and two cells tall.
pub fn make_anomalous_stable_set(res: u32) -> Result<CellSet> {
    let space = GridSpace::vertex_centered(-0.5, 2.5, -0.5, 1.5, res)?;
    let hs = space.cell_size();
    let mut cells = Vec::new();
    let base = row_of(&space, 0.0);
    cells.extend((0..space.width()).map(|c| space.index(c, base)));
    for n in 0.. {
        let s = 0.5f64.powi(n);
        if s < 2.0 * hs {
            break;
        }
        let mut xs = vec![s];
        for m in 2.. {
            let gap = s * (1.0 / m as f64 - 1.0 / (m + 1) as f64);
            xs.push(s * (1.0 + 1.0 / m as f64));
            if gap < 3.0 * hs {
                break;
            }
        }
        // the last pushed segment may crowd the accumulation point
        if xs.len() > 1 && (xs[xs.len() - 1] - s) < 3.0 * hs {
            xs.pop();
        }
        for x in xs {
            cells.extend(rasterize_segment(&space, (x, 0.0), (x, s)));
        }
    }
    CellSet::new(space, cells)
}

/// Components of `set ∩ B_r(center)`, ignoring cells of `exclude`.
pub fn local_component_count(set: &CellSet, center: (f64, f64), r: f64, exclude: Option<&CellSet>) -> Result<usize> {
    let ball = set.space().ball(center, r);
    let mut local = set.intersection(&ball)?;
    if let Some(e) = exclude {
        local = local.difference(e)?;
    }
    Ok(components(&local).len())
}

/// Baseline row `ℝ×{0}` of the anomalous stable set's space.
pub fn anomalous_baseline(space: &GridSpace) -> CellSet {
    let base = row_of(space, 0.0);
    CellSet::from_predicate(*space, |c| space.col_row(c).1 == base)
}

#[cfg(test)]
mod tests;
