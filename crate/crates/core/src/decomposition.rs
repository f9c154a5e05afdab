//! Monotone partitions of cell sets ("label fields"), their quotient graphs,
//! and the diagnostics built on them.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    components, diameter, directed_hausdorff, distance_transform, hausdorff_distance, whitney_size, CellSet,
    DistanceField, GridSpace, WhitneyAccumulator,
};
use crate::raster::NO_LABEL;

pub mod fields;

/// A partition of a domain into connected plaques with dense ids.
/// Ids are ordered by the lowest cell of each plaque.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelField {
    domain: CellSet,
    labels: Vec<u32>,
    plaques: Vec<CellSet>,
}

impl LabelField {
    /// Groups cells by key, then splits every class into its components.
    pub fn from_keys<K: Hash + Eq>(domain: &CellSet, key: impl Fn(usize) -> K) -> LabelField {
        let space = *domain.space();
        let mut class_of: HashMap<K, u32> = HashMap::new();
        let mut class = vec![NO_LABEL; space.len()];
        for c in domain.iter() {
            let n = class_of.len() as u32;
            class[c] = *class_of.entry(key(c)).or_insert(n);
        }
        Self::split_classes(domain, &class)
    }

    /// Builds a field from explicit labels; every class must already be connected.
    pub fn from_labels(domain: &CellSet, labels: &[u32]) -> Result<LabelField> {
        if labels.len() != domain.space().len() {
            return Err(Error::Precondition("label vector does not match the space".into()));
        }
        for c in domain.iter() {
            if labels[c] == NO_LABEL {
                return Err(Error::Precondition(format!("domain cell {c} has no label")));
            }
        }
        let field = Self::split_classes(domain, labels);
        let classes: std::collections::HashSet<u32> = domain.iter().map(|c| labels[c]).collect();
        if classes.len() != field.plaque_count() {
            return Err(Error::Precondition("a label class is not connected".into()));
        }
        Ok(field)
    }

    fn split_classes(domain: &CellSet, class: &[u32]) -> LabelField {
        let space = *domain.space();
        let mut labels = vec![NO_LABEL; space.len()];
        let mut plaques = Vec::new();
        let mut queue = VecDeque::new();
        for start in domain.iter() {
            if labels[start] != NO_LABEL {
                continue;
            }
            let id = plaques.len() as u32;
            let k = class[start];
            labels[start] = id;
            queue.push_back(start);
            let mut cells = Vec::new();
            while let Some(c) = queue.pop_front() {
                cells.push(c);
                for n in space.neighbors8(c) {
                    if labels[n] == NO_LABEL && class[n] == k && domain_has(class, n) {
                        labels[n] = id;
                        queue.push_back(n);
                    }
                }
            }
            cells.sort_unstable();
            plaques.push(CellSet::from_sorted(space, cells));
        }
        LabelField { domain: domain.clone(), labels, plaques }
    }

    pub fn domain(&self) -> &CellSet {
        &self.domain
    }
    pub fn space(&self) -> &GridSpace {
        self.domain.space()
    }
    pub fn plaque_count(&self) -> usize {
        self.plaques.len()
    }
    pub fn plaques(&self) -> &[CellSet] {
        &self.plaques
    }
    pub fn plaque(&self, id: usize) -> &CellSet {
        &self.plaques[id]
    }
    pub fn label(&self, cell: usize) -> Option<usize> {
        self.labels.get(cell).and_then(|&l| (l != NO_LABEL).then_some(l as usize))
    }
    /// Raw label vector over the whole space, `NO_LABEL` off the domain.
    pub fn raw_labels(&self) -> &[u32] {
        &self.labels
    }
    pub fn plaque_at(&self, cell: usize) -> Option<&CellSet> {
        self.label(cell).map(|l| &self.plaques[l])
    }

    /// Sorted neighbor lists of the plaque adjacency graph.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let space = self.space();
        let mut adj = vec![Vec::new(); self.plaques.len()];
        for c in self.domain.iter() {
            let a = self.labels[c];
            for n in space.neighbors8(c) {
                let b = self.labels[n];
                if b != NO_LABEL && b > a {
                    adj[a as usize].push(b as usize);
                    adj[b as usize].push(a as usize);
                }
            }
        }
        for v in &mut adj {
            v.sort_unstable();
            v.dedup();
        }
        adj
    }
}

fn domain_has(class: &[u32], n: usize) -> bool {
    class[n] != NO_LABEL
}

pub fn monotone_restriction(q: &LabelField, y: &CellSet) -> Result<LabelField> {
    if !y.is_subset(&q.domain) {
        return Err(Error::Precondition("restriction set is not contained in the domain".into()));
    }
    Ok(LabelField::from_keys(y, |c| q.labels[c]))
}

/// Cells of `s` with a four-neighbor outside `s` (or missing at the space edge).
pub fn inner_boundary(s: &CellSet) -> CellSet {
    let space = s.space();
    let mask = s.mask();
    let cells = s.iter().filter(|&c| {
        let n4 = space.neighbors4(c);
        n4.len() < 4 || n4.iter().any(|&n| !mask[n])
    });
    CellSet::new(*space, cells).expect("subset of a valid set")
}

/// A discrete disc with its boundary marked at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscDomain {
    cells: CellSet,
    boundary: CellSet,
}

impl DiscDomain {
    pub fn new(cells: CellSet) -> Result<Self> {
        if !cells.is_connected() {
            return Err(Error::Precondition("disc domain is not connected".into()));
        }
        let chi = euler_characteristic(&cells);
        if chi != 1 {
            return Err(Error::Precondition(format!("disc domain has Euler characteristic {chi}")));
        }
        let boundary = inner_boundary(&cells);
        Ok(DiscDomain { cells, boundary })
    }

    /// A domain with an explicitly supplied boundary marking.
    pub fn with_boundary(cells: CellSet, boundary: CellSet) -> Result<Self> {
        let disc = DiscDomain::new(cells)?;
        let cells = disc.cells;
        if !boundary.is_subset(&cells) {
            return Err(Error::Precondition("boundary is not inside the domain".into()));
        }
        Ok(DiscDomain { cells, boundary })
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }
    pub fn boundary(&self) -> &CellSet {
        &self.boundary
    }
}

/// Cubical Euler characteristic V − E + F of the union of closed cell squares.
pub fn euler_characteristic(s: &CellSet) -> i64 {
    use std::collections::HashSet;
    let space = s.space();
    let n = space.resolution() as i64;
    let (w, h) = (space.width() as i64, space.height() as i64);
    let kind = space.kind();
    let norm = |x: i64, y: i64| -> (i64, i64) {
        match kind {
            crate::SpaceKind::Rectangle { .. } => (x, y),
            crate::SpaceKind::Torus => (x.rem_euclid(n), y.rem_euclid(n)),
            crate::SpaceKind::SphereQuotient => {
                let a = (x.rem_euclid(n), y.rem_euclid(n));
                let b = ((-x).rem_euclid(n), (-y).rem_euclid(n));
                a.min(b)
            }
        }
    };
    let edge = |a: (i64, i64), b: (i64, i64)| -> ((i64, i64), (i64, i64)) {
        let sorted = |p: (i64, i64), q: (i64, i64)| if p <= q { (p, q) } else { (q, p) };
        match kind {
            crate::SpaceKind::Rectangle { .. } => sorted(a, b),
            crate::SpaceKind::Torus => {
                // endpoints alone are ambiguous only on tiny tori; key by lower-left corner + direction
                let (x0, y0) = (a.0.min(b.0), a.1.min(b.1));
                let dir = if a.0 == b.0 { 0 } else { 1 };
                ((x0.rem_euclid(n), y0.rem_euclid(n)), (dir, 0))
            }
            crate::SpaceKind::SphereQuotient => {
                let dir = if a.0 == b.0 { 0 } else { 1 };
                let (x0, y0) = (a.0.min(b.0), a.1.min(b.1));
                let (dx, dy) = if dir == 0 { (0, 1) } else { (1, 0) };
                let p = (x0.rem_euclid(n), y0.rem_euclid(n));
                // antipodal image of the edge starting at (x0,y0) starts at (-x0-dx, -y0-dy)
                let q = ((-x0 - dx).rem_euclid(n), (-y0 - dy).rem_euclid(n));
                (p.min(q), (dir, 0))
            }
        }
    };
    let _ = (w, h);
    let mut verts = HashSet::new();
    let mut edges = HashSet::new();
    for c in s.iter() {
        let (x, y) = space.col_row(c);
        let (x, y) = (x as i64, y as i64);
        for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            verts.insert(norm(x + dx, y + dy));
        }
        for (a, b) in [((x, y), (x + 1, y)), ((x, y + 1), (x + 1, y + 1)), ((x, y), (x, y + 1)), ((x + 1, y), (x + 1, y + 1))] {
            edges.insert(edge(a, b));
        }
    }
    verts.len() as i64 - edges.len() as i64 + s.len() as i64
}

/// A fully filled 3×3 block inside `s`, reported by its lower-left cell.
pub fn find_solid_block(s: &CellSet, k: usize) -> Option<usize> {
    let space = s.space();
    let mask = if s.is_sparse() { Vec::new() } else { s.mask() };
    let has = |x: usize| if mask.is_empty() { s.contains(x) } else { mask[x] };
    'outer: for c in s.iter() {
        for dr in 0..k as i64 {
            for dc in 0..k as i64 {
                let mut cur = Some(c);
                for _ in 0..dc {
                    cur = cur.and_then(|x| space.offset(x, 1, 0));
                }
                for _ in 0..dr {
                    cur = cur.and_then(|x| space.offset(x, 0, 1));
                }
                match cur {
                    Some(x) if has(x) => {}
                    _ => continue 'outer,
                }
            }
        }
        return Some(c);
    }
    None
}

/// Connected, no 3×3 block, Euler characteristic one.
pub fn dendrite_proxy(s: &CellSet) -> std::result::Result<(), String> {
    if s.is_empty() {
        return Err("empty".into());
    }
    let n = components(s).len();
    if n != 1 {
        return Err(format!("{n} components"));
    }
    if let Some(c) = find_solid_block(s, 3) {
        return Err(format!("has interior (3×3 block at cell {c})"));
    }
    let chi = euler_characteristic(s);
    if chi != 1 {
        return Err(format!("Euler characteristic {chi}"));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuotientGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub adjacency: Vec<Vec<usize>>,
    pub diameters: Vec<f64>,
    pub boundary_contact: Vec<bool>,
}

impl QuotientGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes == 0 {
            return true;
        }
        bfs_order(&self.adjacency, 0, None).len() == self.nodes
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edges.len() + 1 == self.nodes
    }

    pub fn is_path(&self) -> bool {
        self.is_tree() && self.adjacency.iter().all(|a| a.len() <= 2)
    }

    /// Nodes of a path graph from one end to the other.
    pub fn path_order(&self) -> Option<Vec<usize>> {
        if !self.is_path() {
            return None;
        }
        let start = (0..self.nodes).find(|&v| self.degree(v) <= 1)?;
        Some(bfs_order(&self.adjacency, start, None))
    }

    /// Unique tree path between two nodes.
    pub fn tree_path(&self, a: usize, b: usize) -> Vec<usize> {
        let parent = bfs_parents(&self.adjacency, a);
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

fn bfs_order(adj: &[Vec<usize>], start: usize, skip: Option<usize>) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut order = Vec::new();
    let mut q = VecDeque::from([start]);
    seen[start] = true;
    if let Some(s) = skip {
        seen[s] = true;
    }
    while let Some(v) = q.pop_front() {
        order.push(v);
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                q.push_back(u);
            }
        }
    }
    order
}

fn bfs_parents(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; adj.len()];
    parent[start] = start;
    let mut q = VecDeque::from([start]);
    while let Some(v) = q.pop_front() {
        for &u in &adj[v] {
            if parent[u] == usize::MAX {
                parent[u] = v;
                q.push_back(u);
            }
        }
    }
    parent
}

pub fn quotient_graph(q: &LabelField) -> QuotientGraph {
    let adjacency = q.adjacency();
    let mut edges = Vec::new();
    for (a, ns) in adjacency.iter().enumerate() {
        for &b in ns {
            if a < b {
                edges.push((a, b));
            }
        }
    }
    let boundary = inner_boundary(&q.domain).mask();
    let diameters = q.plaques.iter().map(|p| diameter(p).unwrap_or(0.0)).collect();
    let boundary_contact = q.plaques.iter().map(|p| p.iter().any(|c| boundary[c])).collect();
    QuotientGraph { nodes: q.plaques.len(), edges, adjacency, diameters, boundary_contact }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DendriteVerdict {
    pub is_dendrite: bool,
    pub is_arc: bool,
    pub cycle: Option<Vec<usize>>,
}

pub fn is_dendrite_quotient(q: &LabelField) -> Result<DendriteVerdict> {
    if !q.domain.is_connected() {
        return Err(Error::Precondition("domain is not connected".into()));
    }
    let g = quotient_graph(q);
    if g.is_tree() {
        return Ok(DendriteVerdict { is_dendrite: true, is_arc: g.is_path(), cycle: None });
    }
    Ok(DendriteVerdict { is_dendrite: false, is_arc: false, cycle: find_cycle(&g.adjacency) })
}

fn find_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    for root in 0..n {
        if parent[root] != usize::MAX {
            continue;
        }
        parent[root] = root;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if parent[u] == usize::MAX {
                    parent[u] = v;
                    depth[u] = depth[v] + 1;
                    stack.push(u);
                } else if u != parent[v] && parent[v] != u && parent[u] != v {
                    // non-tree edge: walk both ends up to the common ancestor
                    let (mut a, mut b) = (v, u);
                    let (mut left, mut right) = (vec![a], vec![b]);
                    while a != b {
                        if depth[a] >= depth[b] {
                            a = parent[a];
                            left.push(a);
                        } else {
                            b = parent[b];
                            right.push(b);
                        }
                    }
                    right.pop();
                    right.reverse();
                    left.extend(right);
                    return Some(left);
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CwVerdict {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

pub fn is_cw_decomposition(q: &LabelField, d: &DiscDomain) -> Result<CwVerdict> {
    if d.boundary.is_empty() {
        return Err(Error::Precondition("domain has no marked boundary".into()));
    }
    if &q.domain != d.cells() {
        return Err(Error::Precondition("field domain differs from the disc".into()));
    }
    let boundary = d.boundary.mask();
    let mut diagnostics = Vec::new();
    for (id, p) in q.plaques.iter().enumerate() {
        if !p.iter().any(|c| boundary[c]) {
            diagnostics.push(format!("plaque {id} misses boundary"));
        }
        if let Err(reason) = dendrite_proxy(p) {
            diagnostics.push(format!("plaque {id} fails dendrite proxy: {reason}"));
        }
    }
    Ok(CwVerdict { ok: diagnostics.is_empty(), diagnostics })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    End,
    Regular,
    Ramification(usize),
}

pub fn classify_quotient_point(q: &LabelField, id: usize) -> Result<PointClass> {
    let g = quotient_graph(q);
    if !g.is_tree() {
        return Err(Error::Precondition("quotient is not a dendrite".into()));
    }
    if id >= g.nodes {
        return Err(Error::Precondition(format!("no plaque {id}")));
    }
    Ok(match g.degree(id) {
        0 | 1 => PointClass::End,
        2 => PointClass::Regular,
        k => PointClass::Ramification(k),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Separation {
    Found(usize),
    NotFound(String),
}

pub fn separating_plaque(q: &LabelField, p: [usize; 3]) -> Result<Separation> {
    let g = quotient_graph(q);
    if !g.is_tree() {
        return Err(Error::Precondition("quotient is not a dendrite".into()));
    }
    if p.iter().any(|&v| v >= g.nodes) {
        return Err(Error::Precondition("plaque id out of range".into()));
    }
    if p[0] == p[1] || p[1] == p[2] || p[0] == p[2] {
        return Err(Error::Precondition("plaques must be pairwise distinct".into()));
    }
    for i in 0..3 {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        if g.tree_path(a, b).contains(&p[i]) {
            return Ok(Separation::NotFound(format!(
                "plaque {} separates {a} from {b}: the middle one separates the others",
                p[i]
            )));
        }
    }
    // median of the three: the node shared by all pairwise paths
    let ab = g.tree_path(p[0], p[1]);
    let ac = g.tree_path(p[0], p[2]);
    let bc = g.tree_path(p[1], p[2]);
    let m = ab
        .iter()
        .copied()
        .find(|v| ac.contains(v) && bc.contains(v))
        .expect("three nodes of a tree have a median");
    let comps_without = |skip: usize| {
        let mut comp = vec![usize::MAX; g.nodes];
        let mut k = 0;
        for s in 0..g.nodes {
            if s == skip || comp[s] != usize::MAX {
                continue;
            }
            for v in bfs_order(&g.adjacency, s, Some(skip)) {
                comp[v] = k;
            }
            k += 1;
        }
        comp
    };
    let comp = comps_without(m);
    debug_assert!(comp[p[0]] != comp[p[1]] && comp[p[1]] != comp[p[2]] && comp[p[0]] != comp[p[2]]);
    Ok(Separation::Found(m))
}

/// Breadth-first geodesic inside a plaque, neighbors taken in increasing index.
pub fn plaque_geodesic(plaque: &CellSet, from: usize, to: usize) -> Option<Vec<usize>> {
    let space = plaque.space();
    let mut parent: HashMap<usize, usize> = HashMap::new();
    parent.insert(from, from);
    let mut q = VecDeque::from([from]);
    while let Some(c) = q.pop_front() {
        if c == to {
            break;
        }
        let mut ns: Vec<usize> = space.neighbors8(c).into_iter().filter(|&n| plaque.contains(n)).collect();
        ns.sort_unstable();
        for n in ns {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(n) {
                e.insert(c);
                q.push_back(n);
            }
        }
    }
    if !parent.contains_key(&to) {
        return None;
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = parent[&cur];
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproachSample {
    pub distance: f64,
    pub upper: f64,
    pub symmetric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionDefect {
    pub direction: (i32, i32),
    pub upper: f64,
    pub symmetric: f64,
    pub sequence: Vec<ApproachSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionDefects {
    pub resolution: u32,
    pub cell_size: f64,
    pub upper_defect: f64,
    pub symmetric_defect: f64,
    pub directions: Vec<DirectionDefect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemicontinuityReport {
    pub point: (f64, f64),
    pub levels: Vec<ResolutionDefects>,
}

impl SemicontinuityReport {
    /// Upper defect at the finest resolution is within two cells.
    pub fn upper_semicontinuous(&self) -> bool {
        self.levels.last().is_some_and(|l| l.upper_defect <= 2.0 * l.cell_size + 1e-12)
    }
}

pub const COMPASS: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Defects of the plaques met when approaching `point` along the eight
/// compass directions. The limit plaque of a direction is the plaque of the
/// nearest approach point that lies in a different cell than `point`.
pub fn semicontinuity_profile(
    generator: &dyn Fn(u32) -> Result<LabelField>,
    point: (f64, f64),
    resolutions: &[u32],
) -> Result<SemicontinuityReport> {
    let mut levels = Vec::new();
    for &res in resolutions {
        let q = generator(res)?;
        let space = *q.space();
        let x = space
            .cell_at(point)
            .filter(|&c| q.label(c).is_some())
            .ok_or(Error::PointOutsideDomain(point.0, point.1))?;
        let p0 = q.plaque_at(x).unwrap().clone();
        let dt0 = distance_transform(&p0)?;
        let mut cache: HashMap<usize, DistanceField> = HashMap::new();
        let h = space.cell_size();
        let defects = |cell: usize, cache: &mut HashMap<usize, DistanceField>| -> Result<(f64, f64)> {
            let id = q.label(cell).unwrap();
            let p = q.plaque(id);
            let upper = (dt0.max_over(p) as f64).sqrt() * h;
            if !cache.contains_key(&id) {
                cache.insert(id, distance_transform(p)?);
            }
            let back = (cache[&id].max_over(&p0) as f64).sqrt() * h;
            Ok((upper, upper.max(back)))
        };
        let mut directions = Vec::new();
        for &(dx, dy) in &COMPASS {
            let norm = ((dx * dx + dy * dy) as f64).sqrt();
            let mut sequence = Vec::new();
            let mut limit = None;
            for k in 0..6 {
                let r = 0.1 / f64::powi(2.0, k);
                let pt = (point.0 + r * dx as f64 / norm, point.1 + r * dy as f64 / norm);
                let Some(cell) = space.cell_at(pt).filter(|&c| q.label(c).is_some()) else { continue };
                let (upper, symmetric) = defects(cell, &mut cache)?;
                sequence.push(ApproachSample { distance: r, upper, symmetric });
                if cell != x {
                    limit = Some((upper, symmetric));
                }
            }
            let limit = match limit {
                Some(l) => Some(l),
                None => space
                    .offset(x, dx as i64, dy as i64)
                    .filter(|&c| q.label(c).is_some())
                    .map(|c| defects(c, &mut cache))
                    .transpose()?,
            };
            if let Some((upper, symmetric)) = limit {
                directions.push(DirectionDefect { direction: (dx, dy), upper, symmetric, sequence });
            }
        }
        let upper_defect = directions.iter().map(|d| d.upper).fold(0.0, f64::max);
        let symmetric_defect = directions.iter().map(|d| d.symmetric).fold(0.0, f64::max);
        levels.push(ResolutionDefects { resolution: res, cell_size: h, upper_defect, symmetric_defect, directions });
    }
    Ok(SemicontinuityReport { point, levels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsmoothReport {
    /// Largest excess of arc displacement over endpoint displacement.
    pub defect: f64,
    pub worst_plaque: Option<usize>,
    pub samples: usize,
    /// Per-plaque maxima, for the plaques that were sampled.
    pub per_plaque: Vec<(usize, f64)>,
}

/// Nearest plaque other than `own` as seen from `x`, by breadth-first search.
fn nearby_plaque(q: &LabelField, x: usize, own: usize) -> Option<usize> {
    let space = q.space();
    let mut seen = HashMap::new();
    seen.insert(x, ());
    let mut frontier = vec![x];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        let mut found: Option<(u64, usize)> = None;
        for &c in &frontier {
            for n in space.neighbors8(c) {
                if seen.insert(n, ()).is_some() {
                    continue;
                }
                match q.label(n) {
                    Some(l) if l != own => {
                        let key = (space.dist2_cells(x, n), l);
                        if found.is_none_or(|f| key < f) {
                            found = Some(key);
                        }
                    }
                    Some(_) => next.push(n),
                    None => {}
                }
            }
        }
        if let Some((_, l)) = found {
            return Some(l);
        }
        frontier = next;
    }
    None
}

fn nearest_in(set: &CellSet, x: usize) -> usize {
    let space = set.space();
    set.iter().min_by_key(|&c| (space.dist2_cells(x, c), c)).unwrap()
}

fn arc_hausdorff(space: &GridSpace, a: &[usize], b: &[usize]) -> f64 {
    let dir = |p: &[usize], q: &[usize]| {
        p.iter().map(|&x| q.iter().map(|&y| space.dist2_cells(x, y)).min().unwrap()).max().unwrap()
    };
    (dir(a, b).max(dir(b, a)) as f64).sqrt() * space.cell_size()
}

fn csmooth_over(q: &LabelField, plaques: &[usize], samples: usize, seed: u64) -> CsmoothReport {
    let space = *q.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<usize> = plaques.iter().copied().filter(|&p| q.plaque(p).len() >= 2).collect();
    let per = if eligible.is_empty() { 0 } else { samples.div_ceil(eligible.len()).max(1) };
    let mut report = CsmoothReport { defect: 0.0, worst_plaque: None, samples: 0, per_plaque: Vec::new() };
    for &pid in &eligible {
        let p = q.plaque(pid);
        let mut worst = 0.0f64;
        for _ in 0..per {
            let x = p.cells()[rng.gen_range(0..p.len())];
            let y = p.cells()[rng.gen_range(0..p.len())];
            let Some(other) = nearby_plaque(q, x, pid) else { continue };
            let p2 = q.plaque(other);
            let (x2, y2) = (nearest_in(p2, x), nearest_in(p2, y));
            let (Some(a), Some(b)) = (plaque_geodesic(p, x, y), plaque_geodesic(p2, x2, y2)) else { continue };
            let pert = space.metric(x, x2).max(space.metric(y, y2));
            let d = (arc_hausdorff(&space, &a, &b) - pert).max(0.0);
            worst = worst.max(d);
            report.samples += 1;
        }
        report.per_plaque.push((pid, worst));
        if worst > report.defect || report.worst_plaque.is_none() {
            if worst >= report.defect {
                report.defect = worst;
                report.worst_plaque = Some(pid);
            }
        }
    }
    report
}

/// Sampled C-smoothness defect. `samples` are spread evenly over plaques.
pub fn csmooth_defect(q: &LabelField, samples: usize, seed: u64) -> Result<CsmoothReport> {
    for (id, p) in q.plaques.iter().enumerate() {
        if let Err(reason) = dendrite_proxy(p) {
            return Err(Error::NotDendrite { plaque: id, reason });
        }
    }
    let all: Vec<usize> = (0..q.plaque_count()).collect();
    Ok(csmooth_over(q, &all, samples, seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductOptions {
    /// C-smooth defect threshold as a multiple of the cell size.
    pub csmooth_cells: f64,
    /// Defects at or above this length are reported as a plaque that is not arc-connected.
    pub arc_break: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ProductOptions {
    fn default() -> Self {
        ProductOptions { csmooth_cells: 6.0, arc_break: 0.5, samples: 400, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProductDiagnostic {
    NotCwDecomposition(Vec<String>),
    QuotientNotArc,
    BoundaryPlaqueCount(usize),
    BoundaryPlaqueTrivial(usize),
    TransversalMiss { plaque: usize, hits: usize },
    CsmoothExceeded { plaque: usize, defect: f64 },
    PlaqueNotArcConnected { plaque: usize, defect: f64 },
}

impl std::fmt::Display for ProductDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProductDiagnostic::NotCwDecomposition(d) => write!(f, "not a cw-decomposition ({} issues)", d.len()),
            ProductDiagnostic::QuotientNotArc => write!(f, "quotient not an arc"),
            ProductDiagnostic::BoundaryPlaqueCount(k) => write!(f, "expected two boundary plaques, found {k}"),
            ProductDiagnostic::BoundaryPlaqueTrivial(p) => write!(f, "boundary plaque trivial (plaque {p})"),
            ProductDiagnostic::TransversalMiss { plaque, hits } => {
                write!(f, "plaque {plaque} meets the transversal arc in {hits} runs")
            }
            ProductDiagnostic::CsmoothExceeded { plaque, defect } => {
                write!(f, "C-smooth defect exceeded (plaque {plaque}, defect {defect:.4})")
            }
            ProductDiagnostic::PlaqueNotArcConnected { plaque, defect } => {
                write!(f, "plaque not arc-connected (plaque {plaque}, defect {defect:.4})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductStructure {
    /// Per-cell image in the unit square, `None` off the domain.
    pub coords: Vec<Option<(f64, f64)>>,
    pub transversal: Vec<usize>,
    pub injective: bool,
    /// Largest spread of the transversal coordinate inside one plaque, in target cells.
    pub horizontality_error_cells: f64,
}

fn transversal_arc(q: &LabelField, d: &DiscDomain, ends: (usize, usize)) -> Option<Vec<usize>> {
    let (e1, e2) = (q.plaque(ends.0), q.plaque(ends.1));
    let side = d.boundary.difference(&e1.union(e2).ok()?).ok()?;
    let arc = components(&side).into_iter().next()?;
    let space = q.space();
    let touching = |e: &CellSet| {
        e.iter().find(|&c| space.neighbors8(c).iter().any(|&n| arc.contains(n)))
    };
    let (a, b) = (touching(e1)?, touching(e2)?);
    let mut cells: Vec<usize> = arc.iter().collect();
    cells.push(a);
    cells.push(b);
    let set = CellSet::new(*space, cells).ok()?;
    // order the arc from the first end plaque by breadth-first distance
    plaque_geodesic(&set, a, b)
}

pub fn product_structure(
    q: &LabelField,
    d: &DiscDomain,
    opts: &ProductOptions,
) -> Result<std::result::Result<ProductStructure, Vec<ProductDiagnostic>>> {
    let space = *q.space();
    let mut diags = Vec::new();
    let cw = is_cw_decomposition(q, d)?;
    if !cw.ok {
        diags.push(ProductDiagnostic::NotCwDecomposition(cw.diagnostics));
    }
    let g = quotient_graph(q);
    if !g.is_path() {
        diags.push(ProductDiagnostic::QuotientNotArc);
    }
    let bmask = d.boundary.mask();
    let inside: Vec<usize> =
        (0..q.plaque_count()).filter(|&p| q.plaque(p).iter().all(|c| bmask[c])).collect();
    if inside.len() != 2 {
        diags.push(ProductDiagnostic::BoundaryPlaqueCount(inside.len()));
    }
    for &p in &inside {
        if q.plaque(p).len() < 2 {
            diags.push(ProductDiagnostic::BoundaryPlaqueTrivial(p));
        }
    }
    let proxied: Vec<usize> = (0..q.plaque_count()).filter(|&p| dendrite_proxy(q.plaque(p)).is_ok()).collect();
    let cs = csmooth_over(q, &proxied, opts.samples, opts.seed);
    for &(p, defect) in &cs.per_plaque {
        if defect >= opts.arc_break {
            diags.push(ProductDiagnostic::PlaqueNotArcConnected { plaque: p, defect });
        } else if defect > opts.csmooth_cells * space.cell_size() {
            diags.push(ProductDiagnostic::CsmoothExceeded { plaque: p, defect });
        }
    }
    if !diags.is_empty() {
        return Ok(Err(diags));
    }

    let arc = transversal_arc(q, d, (inside[0], inside[1]))
        .ok_or_else(|| Error::Precondition("no transversal arc joins the boundary plaques".into()))?;
    let arc_pos: HashMap<usize, usize> = arc.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let span = (arc.len() - 1).max(1) as f64;
    let mut coords = vec![None; space.len()];
    let mut acc = WhitneyAccumulator::new(space);
    let mut horiz: f64 = 0.0;
    for pid in 0..q.plaque_count() {
        let p = q.plaque(pid);
        // a digital plaque may cross the arc in a short run of consecutive cells
        let mut hits: Vec<usize> = p.iter().filter_map(|c| arc_pos.get(&c).copied()).collect();
        hits.sort_unstable();
        let contiguous = hits.last().is_some_and(|&l| l + 1 - hits[0] == hits.len());
        if !contiguous {
            let runs = hits.windows(2).filter(|w| w[1] != w[0] + 1).count() + usize::from(!hits.is_empty());
            diags.push(ProductDiagnostic::TransversalMiss { plaque: pid, hits: runs });
            continue;
        }
        let root = arc[hits[0]];
        let t = arc_pos[&root] as f64 / span;
        let total = whitney_size(p)?;
        // breadth-first tree from the root; tree paths are the plaque geodesics
        let mut children: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut seen = std::collections::HashSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(c) = queue.pop_front() {
            let mut ns: Vec<usize> = space.neighbors8(c).into_iter().filter(|&n| p.contains(n)).collect();
            ns.sort_unstable();
            for n in ns {
                if seen.insert(n) {
                    children.entry(c).or_default().push(n);
                    queue.push_back(n);
                }
            }
        }
        let mut ts = Vec::with_capacity(p.len());
        let mut stack: Vec<(usize, bool)> = vec![(root, true)];
        while let Some((c, enter)) = stack.pop() {
            if enter {
                acc.push(c);
                let s = if total > 0.0 { acc.value() / total } else { 0.0 };
                coords[c] = Some((t, s));
                ts.push(t);
                stack.push((c, false));
                if let Some(ch) = children.get(&c) {
                    for &n in ch.iter().rev() {
                        stack.push((n, true));
                    }
                }
            } else {
                acc.pop();
            }
        }
        let lo = ts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        horiz = horiz.max((hi - lo) * span);
    }
    if !diags.is_empty() {
        return Ok(Err(diags));
    }
    let mut pairs: Vec<(f64, f64)> = coords.iter().flatten().copied().collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let injective = pairs.windows(2).all(|w| w[0] != w[1]);
    Ok(Ok(ProductStructure { coords, transversal: arc, injective, horizontality_error_cells: horiz }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCoordinates {
    /// Per-cell (rank of the first plaque, rank of the second plaque).
    pub coords: Vec<Option<(usize, usize)>>,
    pub first_count: usize,
    pub second_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PairFailure {
    NotSingleton { cell: usize, size: usize },
    NotRectangle(String),
    MissedCrossing { first: usize, second: usize, count: usize },
}

fn arc_order(arc: &CellSet) -> Option<Vec<usize>> {
    let space = arc.space();
    let end = arc
        .iter()
        .find(|&c| space.neighbors8(c).iter().filter(|&&n| arc.contains(n)).count() <= 1)
        .unwrap_or(arc.cells()[0]);
    let far = arc.iter().max_by_key(|&c| (plaque_geodesic(arc, end, c).map(|p| p.len()).unwrap_or(0), c))?;
    plaque_geodesic(arc, end, far)
}

pub fn pair_product_structure(
    q1: &LabelField,
    q2: &LabelField,
    d: &DiscDomain,
) -> Result<std::result::Result<PairCoordinates, PairFailure>> {
    if q1.domain() != d.cells() || q2.domain() != d.cells() {
        return Err(Error::Precondition("fields must live on the disc".into()));
    }
    let n1 = q1.plaque_count();
    let n2 = q2.plaque_count();
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for c in d.cells().iter() {
        *count.entry((q1.label(c).unwrap(), q2.label(c).unwrap())).or_default() += 1;
    }
    for c in d.cells().iter() {
        let k = count[&(q1.label(c).unwrap(), q2.label(c).unwrap())];
        if k >= 2 {
            return Ok(Err(PairFailure::NotSingleton { cell: c, size: k }));
        }
    }
    let bmask = d.boundary.mask();
    let on_boundary = |q: &LabelField| -> Vec<usize> {
        (0..q.plaque_count()).filter(|&p| q.plaque(p).iter().all(|c| bmask[c])).collect()
    };
    let (b1, b2) = (on_boundary(q1), on_boundary(q2));
    if b1.len() != 2 || b2.len() != 2 {
        return Ok(Err(PairFailure::NotRectangle(format!(
            "boundary holds {} first and {} second plaques, expected 2 and 2",
            b1.len(),
            b2.len()
        ))));
    }
    let mut cover = vec![false; d.cells().space().len()];
    for &p in &b1 {
        q1.plaque(p).iter().for_each(|c| cover[c] = true);
    }
    for &p in &b2 {
        q2.plaque(p).iter().for_each(|c| cover[c] = true);
    }
    if let Some(c) = d.boundary.iter().find(|&c| !cover[c]) {
        return Ok(Err(PairFailure::NotRectangle(format!("boundary cell {c} is not on a side"))));
    }
    for a in 0..n1 {
        for b in 0..n2 {
            let k = count.get(&(a, b)).copied().unwrap_or(0);
            if k != 1 {
                return Ok(Err(PairFailure::MissedCrossing { first: a, second: b, count: k }));
            }
        }
    }
    // rank first plaques along a second-family side, and vice versa
    let rank = |side: &CellSet, q: &LabelField| -> Option<Vec<usize>> {
        let order = arc_order(side)?;
        let mut r = vec![usize::MAX; q.plaque_count()];
        for (i, c) in order.iter().enumerate() {
            let l = q.label(*c).unwrap();
            if r[l] == usize::MAX {
                r[l] = i;
            }
        }
        let mut ids: Vec<usize> = (0..q.plaque_count()).collect();
        ids.sort_by_key(|&l| r[l]);
        let mut out = vec![0; q.plaque_count()];
        for (k, &l) in ids.iter().enumerate() {
            out[l] = k;
        }
        Some(out)
    };
    let r1 = rank(q2.plaque(b2[0]), q1)
        .ok_or_else(|| Error::Precondition("side plaque is not an arc".into()))?;
    let r2 = rank(q1.plaque(b1[0]), q2)
        .ok_or_else(|| Error::Precondition("side plaque is not an arc".into()))?;
    let mut coords = vec![None; d.cells().space().len()];
    for c in d.cells().iter() {
        coords[c] = Some((r1[q1.label(c).unwrap()], r2[q2.label(c).unwrap()]));
    }
    Ok(Ok(PairCoordinates { coords, first_count: n1, second_count: n2 }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratingSide {
    /// The first field's plaque through x misses the second field's plaque through y.
    FirstAtXMissesSecondAtY,
    SecondAtXMissesFirstAtY,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratingReport {
    pub delta: f64,
    /// First failing y and which intersection was empty.
    pub witness: Option<(usize, GeneratingSide)>,
}

pub fn generating_pair_test(q1: &LabelField, q2: &LabelField, x: usize, eps: f64) -> Result<GeneratingReport> {
    let space = *q1.space();
    let ball = space.ball(space.center(x), eps);
    let k = (eps / space.cell_size() + 1e-9).floor() as usize;
    let (c, r) = space.col_row(x);
    let inside_chart = !space.is_rectangle() || (c >= k && r >= k && c + k < space.width() && r + k < space.height());
    if !inside_chart || !ball.is_subset(q1.domain()) || !ball.is_subset(q2.domain()) {
        return Err(Error::Precondition("x is too close to the domain boundary for this ε".into()));
    }
    let r1 = monotone_restriction(q1, &ball)?;
    let r2 = monotone_restriction(q2, &ball)?;
    let (a1, a2) = (r1.plaque_at(x).unwrap().clone(), r2.plaque_at(x).unwrap().clone());
    let h = space.cell_size();
    let mut by_dist: Vec<(u64, usize)> = ball.iter().map(|y| (space.dist2_cells(x, y), y)).collect();
    by_dist.sort_unstable();
    let kmax = (eps / h).floor() as u64;
    let mut delta = 0.0;
    for k in 1..=kmax {
        for &(d2, y) in by_dist.iter().filter(|(d2, _)| *d2 > (k - 1) * (k - 1) && *d2 <= k * k) {
            let _ = d2;
            if !a1.intersects(r2.plaque_at(y).unwrap()) {
                return Ok(GeneratingReport { delta, witness: Some((y, GeneratingSide::FirstAtXMissesSecondAtY)) });
            }
            if !a2.intersects(r1.plaque_at(y).unwrap()) {
                return Ok(GeneratingReport { delta, witness: Some((y, GeneratingSide::SecondAtXMissesFirstAtY)) });
            }
        }
        delta = k as f64 * h;
    }
    Ok(GeneratingReport { delta, witness: None })
}

/// Number of components of `Q(x) ∩ ∂D`.
pub fn boundary_contact_components(q: &LabelField, d: &DiscDomain, cell: usize) -> Result<usize> {
    let p = q.plaque_at(cell).ok_or_else(|| Error::Precondition(format!("cell {cell} is off the domain")))?;
    Ok(components(&p.intersection(d.boundary())?).len())
}

/// Hausdorff distance between two plaques, exposed for reports.
pub fn plaque_distance(a: &CellSet, b: &CellSet) -> Result<f64> {
    hausdorff_distance(a, b)
}

/// One-sided excess of `a` over `b`.
pub fn plaque_excess(a: &CellSet, b: &CellSet) -> Result<f64> {
    directed_hausdorff(a, b)
}

#[cfg(test)]
mod tests;
