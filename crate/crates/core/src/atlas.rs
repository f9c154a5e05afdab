//! Atlases of compatible decompositions over boxes: chains of plaques,
//! leaves, the plaque metric and the stable atlas of the torus map.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{inner_boundary, DiscDomain, LabelField};
use crate::dynamics::{finite_horizon_plaque_within, Direction, MapKind, StablePlaqueSpec, SurfaceMap};
use crate::error::{Error, Result};
use crate::geometry::{diameter, CellSet, GridSpace, SpaceKind};

#[cfg(test)]
mod tests;

/// A basis element: a connected patch of cells with its boundary marked.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisBox {
    cells: CellSet,
    boundary: CellSet,
    diameter: f64,
    corner: Option<(i64, i64)>,
}

/// The cell at lifted grid coordinates `(i, j)`.
fn lifted_cell(space: &GridSpace, i: i64, j: i64) -> Option<usize> {
    let n = space.resolution() as i64;
    match space.kind() {
        SpaceKind::Rectangle { .. } => {
            ((0..space.width() as i64).contains(&i) && (0..space.height() as i64).contains(&j))
                .then(|| space.index(i as usize, j as usize))
        }
        SpaceKind::Torus => Some(space.index(i.rem_euclid(n) as usize, j.rem_euclid(n) as usize)),
        SpaceKind::SphereQuotient => {
            let (c, r) = (i.rem_euclid(n), j.rem_euclid(n));
            let (c, r) = if r >= n / 2 { (n - 1 - c, n - 1 - r) } else { (c, r) };
            Some(space.index(c as usize, r as usize))
        }
    }
}

impl BasisBox {
    /// The `w × h` block with lower-left cell `(col, row)`, in lifted
    /// coordinates on the torus and sphere and clipped on a rectangle.
    pub fn rect(space: GridSpace, col: i64, row: i64, w: usize, h: usize) -> Result<BasisBox> {
        let n = space.resolution() as usize;
        let limit = match space.kind() {
            SpaceKind::Rectangle { .. } => usize::MAX,
            SpaceKind::Torus => n - 1,
            SpaceKind::SphereQuotient => n / 2 - 1,
        };
        if w > limit || h > limit {
            return Err(Error::Precondition("box wraps around the surface".into()));
        }
        let cells = (0..h as i64).flat_map(|j| (0..w as i64).filter_map(move |i| lifted_cell(&space, col + i, row + j)));
        let cells = CellSet::new(space, cells)?;
        if cells.is_empty() {
            return Err(Error::EmptySet("box"));
        }
        let boundary = inner_boundary(&cells);
        let mut b = Self::finish(cells, boundary)?;
        b.corner = Some((col, row));
        Ok(b)
    }

    /// An open patch of a continuum `ambient`: its boundary is the set of
    /// cells touching the rest of the ambient set.
    pub fn within(cells: CellSet, ambient: &CellSet) -> Result<BasisBox> {
        if !cells.is_subset(ambient) {
            return Err(Error::Precondition("box is not inside the ambient set".into()));
        }
        let space = *cells.space();
        let boundary = cells
            .iter()
            .filter(|&c| space.neighbors8(c).iter().any(|&n| ambient.contains(n) && !cells.contains(n)));
        let boundary = CellSet::new(space, boundary)?;
        Self::finish(cells, boundary)
    }

    fn finish(cells: CellSet, boundary: CellSet) -> Result<BasisBox> {
        if !cells.is_connected() {
            return Err(Error::Precondition("box is not connected".into()));
        }
        if boundary.len() == cells.len() {
            return Err(Error::Precondition("box has empty interior".into()));
        }
        let diameter = diameter(&cells)?;
        Ok(BasisBox { cells, boundary, diameter, corner: None })
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }
    pub fn boundary(&self) -> &CellSet {
        &self.boundary
    }
    pub fn diameter(&self) -> f64 {
        self.diameter
    }
    /// Lower-left corner in lifted grid coordinates, for boxes built by [`BasisBox::rect`].
    pub fn corner(&self) -> Option<(i64, i64)> {
        self.corner
    }

    pub fn disc(&self) -> Result<DiscDomain> {
        DiscDomain::with_boundary(self.cells.clone(), self.boundary.clone())
    }

    /// Lifted coordinates of a cell of a rectangular box.
    fn lift(&self, cell: usize) -> (i64, i64) {
        let space = self.cells.space();
        let (c, r) = space.col_row(cell);
        let (c0, r0) = self.corner.unwrap_or((0, 0));
        match space.kind() {
            SpaceKind::Rectangle { .. } => (c as i64, r as i64),
            _ => {
                let n = space.resolution() as i64;
                (c0 + (c as i64 - c0).rem_euclid(n), r0 + (r as i64 - r0).rem_euclid(n))
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Chart {
    bx: BasisBox,
    /// Plaque id of each box cell, aligned with `bx.cells`.
    labels: Vec<u32>,
    plaques: Vec<CellSet>,
    diameters: Vec<f64>,
}

impl Chart {
    fn label(&self, cell: usize) -> Option<usize> {
        self.bx.cells.cells().binary_search(&cell).ok().map(|i| self.labels[i] as usize)
    }
}

/// Pairs of overlapping charts whose restrictions to the overlap were checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub pairs: Vec<(usize, usize)>,
}

/// A plaque of an atlas: chart index and plaque id within the chart.
pub type PlaqueRef = (usize, usize);

#[derive(Clone, Debug)]
pub struct Atlas {
    space: GridSpace,
    charts: Vec<Chart>,
    scale: f64,
    nodes: Vec<(u32, u32)>,
    cover: Vec<Vec<u32>>,
    certificate: Option<Certificate>,
}

impl Atlas {
    /// Builds an atlas from boxes and decompositions of them; compatibility
    /// is not checked here (see [`compatibility_check`] and [`Atlas::certify`]).
    pub fn new(charts: Vec<(BasisBox, LabelField)>) -> Result<Atlas> {
        let Some(first) = charts.first() else {
            return Err(Error::EmptySet("atlas"));
        };
        let space = *first.0.cells.space();
        let mut out = Vec::with_capacity(charts.len());
        for (i, (bx, field)) in charts.into_iter().enumerate() {
            if *bx.cells.space() != space {
                return Err(Error::SpaceMismatch);
            }
            if field.domain() != &bx.cells {
                return Err(Error::Precondition(format!("chart {i}: field domain differs from its box")));
            }
            let labels = bx.cells.iter().map(|c| field.label(c).expect("domain cell") as u32).collect();
            let plaques = field.plaques().to_vec();
            let diameters = plaques.iter().map(diameter).collect::<Result<Vec<_>>>()?;
            out.push(Chart { bx, labels, plaques, diameters });
        }
        let scale = out.iter().map(|c| c.bx.diameter).fold(0.0, f64::max);
        let mut nodes = Vec::new();
        let mut cover = vec![Vec::new(); space.len()];
        for (i, chart) in out.iter().enumerate() {
            for (p, plaque) in chart.plaques.iter().enumerate() {
                let id = nodes.len() as u32;
                nodes.push((i as u32, p as u32));
                for c in plaque.iter() {
                    cover[c].push(id);
                }
            }
        }
        Ok(Atlas { space, charts: out, scale, nodes, cover, certificate: None })
    }

    /// Checks compatibility and stores the certificate.
    pub fn certify(mut self) -> Result<Atlas> {
        let report = compatibility_check(&self);
        if let Some(o) = report.offending {
            return Err(Error::Precondition(format!(
                "charts {} and {} are not compatible at cell {}",
                o.first, o.second, o.witness
            )));
        }
        self.certificate = Some(Certificate { pairs: report.pairs });
        Ok(self)
    }

    pub fn space(&self) -> &GridSpace {
        &self.space
    }
    /// Largest box diameter.
    pub fn scale(&self) -> f64 {
        self.scale
    }
    pub fn chart_count(&self) -> usize {
        self.charts.len()
    }
    pub fn plaque_count(&self) -> usize {
        self.nodes.len()
    }
    pub fn chart_box(&self, i: usize) -> &BasisBox {
        &self.charts[i].bx
    }
    /// The decomposition of chart `i`.
    pub fn chart_field(&self, i: usize) -> LabelField {
        let chart = &self.charts[i];
        LabelField::from_keys(&chart.bx.cells, |c| chart.label(c).expect("box cell"))
    }
    pub fn plaque(&self, p: PlaqueRef) -> &CellSet {
        &self.charts[p.0].plaques[p.1]
    }
    pub fn plaque_diameter(&self, p: PlaqueRef) -> f64 {
        self.charts[p.0].diameters[p.1]
    }
    /// Plaques containing `cell`.
    pub fn plaques_at(&self, cell: usize) -> Vec<PlaqueRef> {
        self.cover.get(cell).map_or(Vec::new(), |v| v.iter().map(|&n| self.node_ref(n)).collect())
    }
    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }
    /// Cells covered by some box.
    pub fn region(&self) -> CellSet {
        CellSet::from_predicate(self.space, |c| !self.cover[c].is_empty())
    }
    pub fn covers(&self, set: &CellSet) -> bool {
        set.iter().all(|c| self.cover.get(c).is_some_and(|v| !v.is_empty()))
    }

    fn node_ref(&self, n: u32) -> PlaqueRef {
        let (c, p) = self.nodes[n as usize];
        (c as usize, p as usize)
    }
    fn node_cells(&self, n: u32) -> &CellSet {
        self.plaque(self.node_ref(n))
    }
    fn node_diameter(&self, n: u32) -> f64 {
        self.plaque_diameter(self.node_ref(n))
    }
    fn covering(&self, cell: usize) -> Result<&[u32]> {
        match self.cover.get(cell) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(Error::Precondition(format!("cell {cell} is not covered by the atlas"))),
        }
    }

    /// Plaques meeting plaque `n`, excluding `n`.
    fn neighbours(&self, n: u32) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for c in self.node_cells(n).iter() {
            out.extend(self.cover[c].iter().copied().filter(|&m| m != n));
        }
        out
    }

    /// Leaf index of every plaque.
    fn leaf_ids(&self) -> Vec<u32> {
        let mut parent: Vec<u32> = (0..self.nodes.len() as u32).collect();
        fn find(p: &mut [u32], mut x: u32) -> u32 {
            while p[x as usize] != x {
                p[x as usize] = p[p[x as usize] as usize];
                x = p[x as usize];
            }
            x
        }
        for v in &self.cover {
            if let Some((&a, rest)) = v.split_first() {
                for &b in rest {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb) as usize] = ra.min(rb);
                    }
                }
            }
        }
        (0..self.nodes.len() as u32).map(|x| find(&mut parent, x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Offense {
    pub first: usize,
    pub second: usize,
    pub witness: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    pub ok: bool,
    pub pairs: Vec<(usize, usize)>,
    pub offending: Option<Offense>,
}

/// Component index of every overlap cell under the monotone restriction of a chart.
fn restricted_components(chart: &Chart, overlap: &[usize]) -> Vec<u32> {
    let space = chart.bx.cells.space();
    let index: HashMap<usize, usize> = overlap.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut comp = vec![u32::MAX; overlap.len()];
    let mut next = 0;
    for s in 0..overlap.len() {
        if comp[s] != u32::MAX {
            continue;
        }
        let label = chart.label(overlap[s]);
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            for n in space.neighbors8(overlap[i]) {
                if let Some(&j) = index.get(&n) {
                    if comp[j] == u32::MAX && chart.label(n) == label {
                        comp[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
        next += 1;
    }
    comp
}

/// First cell where two partitions of the same cells differ.
fn first_disagreement(a: &[u32], b: &[u32]) -> Option<usize> {
    let (mut ab, mut ba) = (HashMap::new(), HashMap::new());
    (0..a.len()).find(|&i| *ab.entry(a[i]).or_insert(b[i]) != b[i] || *ba.entry(b[i]).or_insert(a[i]) != a[i])
}

/// Cell-for-cell equality of the monotone restrictions of every pair of
/// overlapping charts to their overlap. Reports the first offending pair.
pub fn compatibility_check(atlas: &Atlas) -> Compatibility {
    let per_chart: Vec<(Vec<(usize, usize)>, Option<Offense>)> = (0..atlas.charts.len())
        .into_par_iter()
        .map(|i| {
            let a = &atlas.charts[i];
            let mut partners = BTreeSet::new();
            for c in a.bx.cells.iter() {
                partners.extend(atlas.cover[c].iter().map(|&n| atlas.nodes[n as usize].0 as usize).filter(|&j| j > i));
            }
            let mut pairs = Vec::new();
            for j in partners {
                let b = &atlas.charts[j];
                let overlap: Vec<usize> = a.bx.cells.iter().filter(|&c| b.label(c).is_some()).collect();
                pairs.push((i, j));
                let (ca, cb) = (restricted_components(a, &overlap), restricted_components(b, &overlap));
                if let Some(k) = first_disagreement(&ca, &cb) {
                    return (pairs, Some(Offense { first: i, second: j, witness: overlap[k] }));
                }
            }
            (pairs, None)
        })
        .collect();
    let mut pairs = Vec::new();
    for (p, off) in per_chart {
        pairs.extend(p);
        if let Some(o) = off {
            return Compatibility { ok: false, pairs, offending: Some(o) };
        }
    }
    Compatibility { ok: true, pairs, offending: None }
}

/// Union of all plaques reachable from the plaques of `x` by chains.
pub fn leaf(atlas: &Atlas, x: usize) -> Result<CellSet> {
    let start = atlas.covering(x)?;
    let mut seen: HashSet<u32> = start.iter().copied().collect();
    let mut stack: Vec<u32> = start.to_vec();
    let mut cells = HashSet::new();
    while let Some(n) = stack.pop() {
        for c in atlas.node_cells(n).iter() {
            cells.insert(c);
            for &m in &atlas.cover[c] {
                if seen.insert(m) {
                    stack.push(m);
                }
            }
        }
    }
    CellSet::new(atlas.space, cells)
}

/// A chain of plaques with consecutive members intersecting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub links: Vec<PlaqueRef>,
    /// Sum of plaque diameters.
    pub weight: f64,
}

/// The lightest chain from a plaque of `x` to a plaque of `y`, plaque
/// diameters as node weights; `None` when `y` is on another leaf.
pub fn shortest_chain(atlas: &Atlas, x: usize, y: usize) -> Result<Option<Chain>> {
    let start = atlas.covering(x)?;
    atlas.covering(y)?;
    let mut best: HashMap<u32, f64> = HashMap::new();
    let mut parent: HashMap<u32, u32> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for &n in start {
        let w = atlas.node_diameter(n);
        best.insert(n, w);
        heap.push(Reverse((w.to_bits(), n)));
    }
    while let Some(Reverse((bits, n))) = heap.pop() {
        let d = f64::from_bits(bits);
        if best.get(&n).is_some_and(|&b| b < d) {
            continue;
        }
        if atlas.node_cells(n).contains(y) {
            let mut links = vec![atlas.node_ref(n)];
            let mut cur = n;
            while let Some(&p) = parent.get(&cur) {
                links.push(atlas.node_ref(p));
                cur = p;
            }
            links.reverse();
            return Ok(Some(Chain { links, weight: d }));
        }
        for m in atlas.neighbours(n) {
            let nd = d + atlas.node_diameter(m);
            if best.get(&m).is_none_or(|&b| nd < b) {
                best.insert(m, nd);
                parent.insert(m, n);
                heap.push(Reverse((nd.to_bits(), m)));
            }
        }
    }
    Ok(None)
}

/// `dist_A(x, y)`: infimum over chains of the sum of plaque diameters,
/// `+∞` across leaves.
pub fn plaque_metric(atlas: &Atlas, x: usize, y: usize) -> Result<f64> {
    Ok(shortest_chain(atlas, x, y)?.map_or(f64::INFINITY, |c| c.weight))
}

/// Stable (or unstable) atlas of the torus map: boxes of diameter at most
/// `scale` overlapping by half, plaques the digital lines of the stable
/// direction, each box certified against greedy `delta`-stable plaques.
pub fn stable_atlas(m: &SurfaceMap, delta: f64, horizon: usize, scale: f64, space: &GridSpace) -> Result<Atlas> {
    invariant_atlas(m, Direction::Stable, delta, horizon, scale, space)
}

pub fn invariant_atlas(
    m: &SurfaceMap,
    direction: Direction,
    delta: f64,
    horizon: usize,
    scale: f64,
    space: &GridSpace,
) -> Result<Atlas> {
    if m.kind != MapKind::TorusAnosov {
        return Err(Error::Precondition("invariant atlases are built for the torus map".into()));
    }
    m.check_space(space)?;
    if !(scale > 0.0 && scale <= delta) {
        return Err(Error::Precondition(format!("basis scale {scale} must lie in (0, delta = {delta}]")));
    }
    let n = space.resolution() as i64;
    let side = side_for_scale(space, scale);
    if side < 4 {
        return Err(Error::Precondition(format!("basis scale {scale} is below four cells")));
    }
    let stride = (side / 2) as i64;
    let per_axis = (n + stride - 1) / stride;
    let (a, b) = line_normal(m.direction(direction).expect("torus map has directions"), n);
    let boxes: Vec<(i64, i64)> = (0..per_axis).flat_map(|j| (0..per_axis).map(move |i| (i * stride, j * stride))).collect();
    let charts: Vec<(BasisBox, LabelField)> = boxes
        .par_iter()
        .map(|&(c0, r0)| {
            let bx = BasisBox::rect(*space, c0, r0, side, side)?;
            let field = LabelField::from_keys(bx.cells(), |c| {
                let (i, j) = bx.lift(c);
                (a * i + b * j).div_euclid(n)
            });
            certify_box(m, direction, delta, horizon, &bx, &field)?;
            Ok((bx, field))
        })
        .collect::<Result<_>>()?;
    Atlas::new(charts)?.certify()
}

/// Integer normal `(a, b)` of the lines along `v` with `|a| + |b| = n`, so
/// that lattice translations by `n` permute the digital lines; nudged to
/// `gcd(a, b) = 1`.
fn line_normal(v: (f64, f64), n: i64) -> (i64, i64) {
    let (nx, ny) = (-v.1, v.0);
    let t = nx.abs() / (nx.abs() + ny.abs());
    let a0 = (t * n as f64).round() as i64;
    let gcd = |mut x: i64, mut y: i64| {
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x.abs()
    };
    let a = [0, 1, -1, 2, -2, 3, -3]
        .iter()
        .map(|d| a0 + d)
        .find(|&a| (1..n).contains(&a) && gcd(a, n - a) == 1)
        .unwrap_or(a0);
    (a * nx.signum() as i64, (n - a) * ny.signum() as i64)
}

/// Each plaque through the box center and the four quarter points must lie
/// within one cell of the greedy finite-horizon plaque grown from it near the box.
fn certify_box(m: &SurfaceMap, direction: Direction, delta: f64, horizon: usize, bx: &BasisBox, field: &LabelField) -> Result<()> {
    let space = *bx.cells.space();
    let (c0, r0) = bx.corner.expect("rect box");
    let side = (bx.cells.len() as f64).sqrt() as i64;
    // the stable plaque is not confined to the box; let it run two cells past the walls
    let room = bx.cells.dilate(2);
    let mut done = HashSet::new();
    for (fi, fj) in [(2, 2), (1, 1), (3, 1), (1, 3), (3, 3)] {
        let cell = lifted_cell(&space, c0 + side * fi / 4, r0 + side * fj / 4).expect("torus cell");
        let Some(id) = field.label(cell) else { continue };
        if !done.insert(id) {
            continue;
        }
        let spec = StablePlaqueSpec { base: space.center(cell), delta, horizon, direction };
        let grown = finite_horizon_plaque_within(m, &spec, &space, &room)?;
        let near: HashSet<usize> = grown.iter().flat_map(|g| std::iter::once(g).chain(space.neighbors8(g))).collect();
        if let Some(bad) = field.plaque(id).iter().find(|c| !near.contains(c)) {
            return Err(Error::Precondition(format!(
                "cell {bad} of a box plaque is more than one cell from the {delta}-stable plaque"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub samples: usize,
    pub branch_free: usize,
    pub fraction: f64,
    /// Plaques of sampled leaves from which three or more branches leave.
    pub ramified_plaques: usize,
}

/// Number of pieces of the neighbouring plaques outside plaque `n`.
fn branches(atlas: &Atlas, n: u32) -> usize {
    let own = atlas.node_cells(n);
    let mut rest: HashSet<usize> = HashSet::new();
    for m in atlas.neighbours(n) {
        rest.extend(atlas.node_cells(m).iter().filter(|&c| !own.contains(c)));
    }
    let mut count = 0;
    while let Some(&s) = rest.iter().next() {
        rest.remove(&s);
        count += 1;
        let mut stack = vec![s];
        while let Some(c) = stack.pop() {
            for nb in atlas.space.neighbors8(c) {
                if rest.remove(&nb) {
                    stack.push(nb);
                }
            }
        }
    }
    count
}

/// Fraction of sampled cells whose leaf has no ramified plaque. A plaque is
/// ramified when the neighbouring plaques leave it in three or more pieces.
/// With `samples` at least the covered cell count every cell is used.
pub fn leaf_genericity_report(atlas: &Atlas, samples: usize, seed: u64) -> Result<GenericityReport> {
    let region = atlas.region();
    let cells: Vec<usize> = if samples >= region.len() {
        region.cells().to_vec()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, region.len(), samples).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| region.cells()[i]).collect()
    };
    let ids = atlas.leaf_ids();
    let mut members: HashMap<u32, Vec<u32>> = HashMap::new();
    for (n, &l) in ids.iter().enumerate() {
        members.entry(l).or_default().push(n as u32);
    }
    let mut verdict: HashMap<u32, usize> = HashMap::new();
    let mut branch_free = 0;
    for &c in &cells {
        let l = ids[atlas.cover[c][0] as usize];
        let ramified = *verdict
            .entry(l)
            .or_insert_with(|| members[&l].par_iter().filter(|&&n| branches(atlas, n) >= 3).count());
        if ramified == 0 {
            branch_free += 1;
        }
    }
    let ramified_plaques = verdict.values().sum();
    Ok(GenericityReport {
        samples: cells.len(),
        branch_free,
        fraction: if cells.is_empty() { 1.0 } else { branch_free as f64 / cells.len() as f64 },
        ramified_plaques,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactnessProbe {
    /// Every chart meets the leaf in at most two plaques.
    pub finite_cover: bool,
    pub leaf_cells: usize,
    pub leaf_plaques: usize,
    pub max_plaques_per_chart: usize,
}

/// How the leaf of `x` sits in the atlas at its basis scale. A leaf that
/// comes back to some chart in many plaques is accumulating on itself.
pub fn leaf_compactness_probe(atlas: &Atlas, x: usize) -> Result<CompactnessProbe> {
    let cells = leaf(atlas, x)?;
    let mut plaques = BTreeSet::new();
    for c in cells.iter() {
        plaques.extend(atlas.cover[c].iter().copied());
    }
    let mut per_chart: HashMap<u32, usize> = HashMap::new();
    for &n in &plaques {
        *per_chart.entry(atlas.nodes[n as usize].0).or_default() += 1;
    }
    let max = per_chart.values().copied().max().unwrap_or(0);
    Ok(CompactnessProbe { finite_cover: max <= 2, leaf_cells: cells.len(), leaf_plaques: plaques.len(), max_plaques_per_chart: max })
}

/// Boxes of `side` cells at the given stride over a rectangle space, each
/// carrying the monotone restriction of a global field.
pub fn restricted_atlas(field: &LabelField, side: usize, stride: usize) -> Result<Atlas> {
    let space = *field.space();
    if !space.is_rectangle() {
        return Err(Error::Precondition("restricted atlases need a rectangle space".into()));
    }
    if stride == 0 || side < 3 {
        return Err(Error::Precondition("box side must be at least 3 and stride positive".into()));
    }
    let (w, h) = (space.width() as i64, space.height() as i64);
    let s = side as i64;
    let starts = |len: i64| {
        let mut v: Vec<i64> = (0..=(len - s).max(0)).step_by(stride).collect();
        if *v.last().unwrap() != (len - s).max(0) {
            v.push((len - s).max(0));
        }
        v
    };
    let (cols, rows) = (starts(w), starts(h));
    let mut charts = Vec::new();
    for &r in &rows {
        for &c in &cols {
            let bx = BasisBox::rect(space, c, r, side, side)?;
            if !bx.cells.is_subset(field.domain()) {
                continue;
            }
            let q = crate::decomposition::monotone_restriction(field, bx.cells())?;
            charts.push((bx, q));
        }
    }
    Atlas::new(charts)
}

/// Box side in cells for a basis scale (box diameter) on a space.
pub fn side_for_scale(space: &GridSpace, scale: f64) -> usize {
    (scale / (std::f64::consts::SQRT_2 * space.cell_size())).floor() as usize + 1
}
