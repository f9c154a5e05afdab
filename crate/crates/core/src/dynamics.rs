//! The linear Anosov map of the torus, its quotient on the sphere, and the
//! finite-horizon estimators built on them.
//!
//! Points are handled on the torus lift. Orbits use 62-bit fixed point
//! arithmetic modulo 1, so forward and inverse iterates are exact up to the
//! initial rounding of the coordinates.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{components, diameter, sphere_chart, CellSet, Continuum, GridSpace, SpaceKind};

const FRAC_BITS: i32 = 62;
const MASK: u64 = (1u64 << FRAC_BITS) - 1;

fn to_fixed(x: f64) -> u64 {
    ((x.rem_euclid(1.0) * 2f64.powi(FRAC_BITS)).round() as u64) & MASK
}

fn from_fixed(x: u64) -> f64 {
    let v = x as f64 / 2f64.powi(FRAC_BITS);
    if v >= 1.0 { 0.0 } else { v }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapKind {
    /// `(x, y) ↦ (2x + y, x + y)` mod 1.
    TorusAnosov,
    /// The torus map on the quotient by `p ~ -p`.
    SpherePseudoAnosov,
    /// The identity of the torus, a degenerate reference.
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMap {
    pub kind: MapKind,
}

/// Largest eigenvalue of the toral matrix.
pub fn anosov_lambda() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

/// Unit eigenvectors (unstable, stable) of the toral matrix.
pub fn eigenbasis() -> ((f64, f64), (f64, f64)) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let nu = (1.0 + 1.0 / (phi * phi)).sqrt();
    let ns = (1.0 + phi * phi).sqrt();
    ((1.0 / nu, (1.0 / phi) / nu), (1.0 / ns, -phi / ns))
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

fn wrap(d: f64) -> f64 {
    d - d.round()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Stable,
    Unstable,
}

impl SurfaceMap {
    pub fn torus_anosov() -> Self {
        SurfaceMap { kind: MapKind::TorusAnosov }
    }
    pub fn sphere_pseudo_anosov() -> Self {
        SurfaceMap { kind: MapKind::SpherePseudoAnosov }
    }
    pub fn identity() -> Self {
        SurfaceMap { kind: MapKind::Identity }
    }

    pub fn space(&self, resolution: u32) -> Result<GridSpace> {
        match self.kind {
            MapKind::SpherePseudoAnosov => GridSpace::sphere(resolution),
            _ => GridSpace::torus(resolution),
        }
    }

    pub(crate) fn check_space(&self, space: &GridSpace) -> Result<()> {
        let want = match self.kind {
            MapKind::SpherePseudoAnosov => SpaceKind::SphereQuotient,
            _ => SpaceKind::Torus,
        };
        if space.kind() != want {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    fn step(&self, p: (u64, u64), forward: bool) -> (u64, u64) {
        let (x, y) = p;
        match (self.kind, forward) {
            (MapKind::Identity, _) => p,
            (_, true) => (x.wrapping_mul(2).wrapping_add(y) & MASK, x.wrapping_add(y) & MASK),
            (_, false) => (x.wrapping_sub(y) & MASK, y.wrapping_mul(2).wrapping_sub(x) & MASK),
        }
    }

    fn lift_orbit(&self, p: (f64, f64), n: i64) -> (f64, f64) {
        let mut q = (to_fixed(p.0), to_fixed(p.1));
        for _ in 0..n.unsigned_abs() {
            q = self.step(q, n > 0);
        }
        (from_fixed(q.0), from_fixed(q.1))
    }

    /// Images `f^0(p), f^{±1}(p), …, f^{±horizon}(p)` on the lift.
    fn orbit_window(&self, p: (f64, f64), horizon: usize, dir: Direction) -> Vec<(f64, f64)> {
        let mut q = (to_fixed(p.0), to_fixed(p.1));
        let mut out = Vec::with_capacity(horizon + 1);
        out.push((from_fixed(q.0), from_fixed(q.1)));
        for _ in 0..horizon {
            q = self.step(q, dir == Direction::Stable);
            out.push((from_fixed(q.0), from_fixed(q.1)));
        }
        out
    }

    pub fn forward(&self, p: (f64, f64)) -> (f64, f64) {
        orbit(self, p, 1)
    }

    pub fn inverse(&self, p: (f64, f64)) -> (f64, f64) {
        orbit(self, p, -1)
    }

    /// Unit direction contracted (stable) or expanded (unstable) by the map.
    pub fn direction(&self, dir: Direction) -> Option<(f64, f64)> {
        if self.kind == MapKind::Identity {
            return None;
        }
        let (u, s) = eigenbasis();
        Some(if dir == Direction::Stable { s } else { u })
    }

    /// Images of the four order-two points; 1-prongs on the sphere.
    pub fn prongs(&self) -> Vec<(f64, f64)> {
        let pts = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)];
        match self.kind {
            MapKind::SpherePseudoAnosov => pts.iter().map(|&p| sphere_chart(p)).collect(),
            _ => pts.to_vec(),
        }
    }

    fn representative(&self, p: (f64, f64)) -> (f64, f64) {
        match self.kind {
            MapKind::SpherePseudoAnosov => sphere_chart(p),
            _ => (p.0.rem_euclid(1.0), p.1.rem_euclid(1.0)),
        }
    }
}

/// `f^n(p)`, reduced to the chart of the map's surface.
pub fn orbit(m: &SurfaceMap, p: (f64, f64), n: i64) -> (f64, f64) {
    m.representative(m.lift_orbit(p, n))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StablePlaqueSpec {
    pub base: (f64, f64),
    pub delta: f64,
    pub horizon: usize,
    pub direction: Direction,
}

/// Lifts of the cell center nearest `x`: one on the torus, two (±) on the sphere.
fn lifts_near(space: &GridSpace, cell: usize, x: (f64, f64)) -> Vec<(f64, f64)> {
    let c = space.center(cell);
    let near = |c: (f64, f64)| (x.0 + wrap(c.0 - x.0), x.1 + wrap(c.1 - x.1));
    match space.kind() {
        SpaceKind::SphereQuotient => vec![near(c), near((-c.0, -c.1))],
        _ => vec![near(c)],
    }
}

/// A point of `cell` on the line through `x` along `v`, if the line crosses
/// a lift of the cell within `reach` of `x`; otherwise the corner closest to the line.
/// The second flag tells whether the point is on the line.
fn line_representative(space: &GridSpace, cell: usize, x: (f64, f64), v: Option<(f64, f64)>, reach: f64) -> ((f64, f64), bool) {
    let mut lifts = lifts_near(space, cell, x);
    lifts.sort_by(|a, b| (a.0 - x.0).hypot(a.1 - x.1).total_cmp(&(b.0 - x.0).hypot(b.1 - x.1)));
    lifts.truncate(1.max(lifts.iter().filter(|c| (c.0 - x.0).hypot(c.1 - x.1) <= reach).count()));
    let Some(v) = v else {
        let p = *lifts
            .iter()
            .min_by(|a, b| (a.0 - x.0).hypot(a.1 - x.1).total_cmp(&(b.0 - x.0).hypot(b.1 - x.1)))
            .unwrap();
        return (p, true);
    };
    let half = space.cell_size() / 2.0;
    // (distance off the line, |t|, point)
    let mut best: Option<(f64, f64, (f64, f64))> = None;
    let mut offer = |off: f64, t: f64, p: (f64, f64)| {
        if best.is_none_or(|(bo, bt, _)| (off, t.abs()) < (bo, bt)) {
            best = Some((off, t.abs(), p));
        }
    };
    for c in lifts {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (xi, vi, ci) in [(x.0, v.0, c.0), (x.1, v.1, c.1)] {
            if vi.abs() < 1e-15 {
                if (xi - ci).abs() > half {
                    lo = f64::INFINITY;
                }
                continue;
            }
            let (a, b) = ((ci - half - xi) / vi, (ci + half - xi) / vi);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        if lo <= hi {
            let t = 0.5 * (lo + hi);
            offer(0.0, t, (x.0 + t * v.0, x.1 + t * v.1));
        } else {
            for (sx, sy) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                let p = (c.0 + sx * half, c.1 + sy * half);
                let d = (p.0 - x.0, p.1 - x.1);
                offer((d.0 * v.1 - d.1 * v.0).abs(), d.0 * v.0 + d.1 * v.1, p);
            }
        }
    }
    let (off, _, p) = best.unwrap();
    (p, off == 0.0)
}

/// Greedy maximal connected set through `base` whose iterates over the horizon
/// keep diameter at most `delta`. Each cell is represented by a point on the
/// stable (unstable) line through the base point; the frontier is expanded in
/// order of distance to the base, ties by cell index.
pub fn finite_horizon_plaque(m: &SurfaceMap, spec: &StablePlaqueSpec, space: &GridSpace) -> Result<Continuum> {
    Ok(grow_plaque(m, spec, space, None)?.0)
}

/// As [`finite_horizon_plaque`], growing only through cells of `within`.
pub fn finite_horizon_plaque_within(m: &SurfaceMap, spec: &StablePlaqueSpec, space: &GridSpace, within: &CellSet) -> Result<Continuum> {
    let start = space.cell_at(spec.base).ok_or(Error::PointOutsideDomain(spec.base.0, spec.base.1))?;
    if !within.contains(start) {
        return Err(Error::PointOutsideDomain(spec.base.0, spec.base.1));
    }
    Ok(grow_plaque(m, spec, space, Some(within))?.0)
}

struct Grown {
    members: Vec<Vec<(f64, f64)>>,
    on_line: Vec<bool>,
}

impl Grown {
    fn diameter_at(&self, space: &GridSpace, n: usize) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.members.iter().enumerate() {
            for b in &self.members[i + 1..] {
                d = d.max(space.point_distance(a[n], b[n]));
            }
        }
        d
    }

    /// Diameter at time `n` of the members represented on the line.
    fn line_diameter_at(&self, space: &GridSpace, n: usize) -> f64 {
        let line: Vec<_> = self.members.iter().zip(&self.on_line).filter(|(_, &l)| l).map(|(m, _)| m[n]).collect();
        let mut d: f64 = 0.0;
        for (i, a) in line.iter().enumerate() {
            for b in &line[i + 1..] {
                d = d.max(space.point_distance(*a, *b));
            }
        }
        d
    }
}

fn grow_plaque(m: &SurfaceMap, spec: &StablePlaqueSpec, space: &GridSpace, within: Option<&CellSet>) -> Result<(Continuum, Grown)> {
    m.check_space(space)?;
    let h = space.cell_size();
    if !(spec.delta >= 4.0 * h) {
        return Err(Error::Precondition(format!(
            "delta {} is below the resolution floor {}",
            spec.delta,
            4.0 * h
        )));
    }
    let start = space.cell_at(spec.base).ok_or(Error::PointOutsideDomain(spec.base.0, spec.base.1))?;
    let x = spec.base;
    let v = m.direction(spec.direction);
    let key = |cell: usize| {
        let c = lifts_near(space, cell, x)
            .into_iter()
            .map(|c| (c.0 - x.0).hypot(c.1 - x.1))
            .fold(f64::INFINITY, f64::min);
        (c.to_bits(), cell)
    };
    let mut members: Vec<usize> = Vec::new();
    let mut images: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut on_line = Vec::new();
    let mut seen = HashSet::from([start]);
    let mut frontier = BTreeSet::from([key(start)]);
    while let Some((_, cell)) = frontier.pop_first() {
        let (rep, line) = if cell == start { (x, true) } else { line_representative(space, cell, x, v, spec.delta) };
        let orbit = m.orbit_window(rep, spec.horizon, spec.direction);
        let ok = images.iter().all(|img| (0..=spec.horizon).all(|n| space.point_distance(img[n], orbit[n]) <= spec.delta));
        if !ok {
            continue;
        }
        members.push(cell);
        images.push(orbit);
        on_line.push(line);
        for nb in space.neighbors8(cell) {
            if within.is_none_or(|w| w.contains(nb)) && seen.insert(nb) {
                frontier.insert(key(nb));
            }
        }
    }
    let set = Continuum::new(CellSet::new(*space, members)?)?;
    Ok((set, Grown { members: images, on_line }))
}

/// Cells whose centers stay within `eps` of the orbit of `p` for `n ∈ [0, horizon]`.
pub fn local_stable_set(m: &SurfaceMap, p: (f64, f64), eps: f64, horizon: usize, space: &GridSpace) -> Result<CellSet> {
    m.check_space(space)?;
    if eps < 4.0 * space.cell_size() {
        return Err(Error::Precondition("eps is below the resolution floor".into()));
    }
    let base = m.orbit_window(p, horizon, Direction::Stable);
    let keep: Vec<bool> = (0..space.len())
        .into_par_iter()
        .map(|cell| {
            let o = m.orbit_window(space.center(cell), horizon, Direction::Stable);
            (0..=horizon).all(|n| space.point_distance(o[n], base[n]) <= eps)
        })
        .collect();
    Ok(CellSet::from_mask(*space, &keep))
}

/// Whether `q` stays within `eps` of `p` for `n ∈ [0, horizon]`.
pub fn jointly_stable(m: &SurfaceMap, space: &GridSpace, p: (f64, f64), q: (f64, f64), eps: f64, horizon: usize) -> bool {
    let a = m.orbit_window(p, horizon, Direction::Stable);
    let b = m.orbit_window(q, horizon, Direction::Stable);
    (0..=horizon).all(|n| space.point_distance(a[n], b[n]) <= eps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CwnSample {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CwnReport {
    pub samples: Vec<CwnSample>,
    pub max: usize,
    /// `histogram[k]` = number of samples with `k` components.
    pub histogram: Vec<usize>,
    pub witnesses: Vec<(f64, f64)>,
}

/// Near-diagonal sample pairs; on the sphere every other sample is drawn within
/// 0.05 of a 1-prong.
pub fn cwn_pairs(m: &SurfaceMap, delta: f64, samples: usize, seed: u64) -> Vec<((f64, f64), (f64, f64))> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prongs = m.prongs();
    (0..samples)
        .map(|i| {
            let x = if m.kind == MapKind::SpherePseudoAnosov && i % 2 == 1 {
                let q = prongs[(i / 2) % prongs.len()];
                let (r, a) = (0.05 * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU);
                (q.0 + r * a.cos(), q.1 + r * a.sin())
            } else {
                (rng.gen::<f64>(), rng.gen::<f64>())
            };
            let (r, a) = (0.25 * delta * rng.gen::<f64>(), rng.gen::<f64>() * std::f64::consts::TAU);
            let y = (x.0 + r * a.cos(), x.1 + r * a.sin());
            (m.representative(x), m.representative(y))
        })
        .collect()
}

/// For near pairs `(x, y)`, counts components of the stable plaque at `x`
/// meeting the unstable plaque at `y`.
pub fn cwn_estimate(m: &SurfaceMap, delta: f64, horizon: usize, samples: usize, seed: u64, space: &GridSpace) -> Result<CwnReport> {
    m.check_space(space)?;
    let pairs = cwn_pairs(m, delta, samples, seed);
    let results: Vec<Result<CwnSample>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let stable = StablePlaqueSpec { base: x, delta, horizon, direction: Direction::Stable };
            let (a, grown) = grow_plaque(m, &stable, space, None)?;
            if grown.line_diameter_at(space, horizon) > delta / 2.0 {
                return Err(Error::Precondition("plaque exceeded diameter budget at every horizon".into()));
            }
            let unstable = StablePlaqueSpec { base: y, delta, horizon, direction: Direction::Unstable };
            let b = finite_horizon_plaque(m, &unstable, space)?;
            let meet = a.intersection(&b)?;
            Ok(CwnSample { x, y, count: components(&meet).len() })
        })
        .collect();
    let samples: Vec<CwnSample> = results.into_iter().collect::<Result<_>>()?;
    let max = samples.iter().map(|s| s.count).max().unwrap_or(0);
    let mut histogram = vec![0; max + 1];
    for s in &samples {
        histogram[s.count] += 1;
    }
    let witnesses = samples.iter().filter(|s| s.count == max).map(|s| s.x).collect();
    Ok(CwnReport { samples, max, histogram, witnesses })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CantorOptions {
    pub eps: f64,
    pub levels: usize,
    pub horizon: usize,
    /// Forward iterates scored per candidate base point.
    pub orbit_budget: usize,
    /// Candidate base points for the recurrence search.
    pub candidates: usize,
    /// Half-length of the unstable arc of the base point that is searched.
    pub arc_length: f64,
    pub seed: u64,
}

impl Default for CantorOptions {
    fn default() -> Self {
        CantorOptions { eps: 0.25, levels: 3, horizon: 10, orbit_budget: 2000, candidates: 16, arc_length: 2000.0, seed: 7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CantorResult {
    pub base: (f64, f64),
    pub points: Vec<(f64, f64)>,
    /// Position of each point along the unstable line of the base, in length units.
    pub arc_params: Vec<f64>,
    pub level_reached: usize,
    pub complete: bool,
    pub diagnostics: Vec<String>,
}

/// Base point whose forward orbit visits the most boxes of an `eps/2` grid.
fn pseudo_transitive_point(m: &SurfaceMap, opts: &CantorOptions) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let boxes = (2.0 / opts.eps).ceil().max(1.0) as usize;
    let mut best = ((0.0, 0.0), 0usize);
    for _ in 0..opts.candidates.max(1) {
        let p = m.representative((rng.gen::<f64>(), rng.gen::<f64>()));
        let mut seen = HashSet::new();
        let mut q = (to_fixed(p.0), to_fixed(p.1));
        for _ in 0..opts.orbit_budget {
            let r = m.representative((from_fixed(q.0), from_fixed(q.1)));
            seen.insert(((r.0 * boxes as f64) as usize, (r.1 * boxes as f64) as usize));
            q = m.step(q, true);
        }
        if seen.len() > best.1 {
            best = (p, seen.len());
        }
    }
    best.0
}

/// Positions `s` along the unstable line `p + s·v_u` (|s| ≤ L) that are
/// identified with `x = p + s_x·v_u` up to a stable displacement of at most
/// `tau`, directly or through `q ~ -q`. Returns `(s, displacement)`.
fn stable_partners(m: &SurfaceMap, p: (f64, f64), s_x: f64, tau: f64, arc: f64) -> Vec<(f64, f64)> {
    let (vu, vs) = eigenbasis();
    let mut out = Vec::new();
    // y - x = (s - s_x) v_u ≡ t v_s mod Z²: (s - s_x) = u(k), t = -s(k)
    // y + x = 2p + (s + s_x) v_u ≡ t v_s: s = u(k) - u(2p) - s_x, t = s(2p) - s(k)
    let mut shifts = vec![(0.0, 0.0, 1.0)];
    if m.kind == MapKind::SpherePseudoAnosov {
        let two_p = (2.0 * p.0, 2.0 * p.1);
        shifts.push((dot(two_p, vu), dot(two_p, vs), -1.0));
    }
    for (cu, cs, sign) in shifts {
        let reach = arc + cu.abs() + s_x.abs() + 2.0;
        // k = (k1, k2); s(k) = vs.0 k1 + vs.1 k2 must lie within tau of cs
        let k2_max = (reach / vu.1.abs().min(vu.0.abs()) + 2.0).ceil() as i64;
        for k2 in -k2_max..=k2_max {
            let k2f = k2 as f64;
            let lo = ((cs - tau) - vs.1 * k2f) / vs.0;
            let hi = ((cs + tau) - vs.1 * k2f) / vs.0;
            for k1 in lo.min(hi).ceil() as i64..=lo.max(hi).floor() as i64 {
                let k = (k1 as f64, k2f);
                let (ku, ks) = (dot(k, vu), dot(k, vs));
                let (s, t) = if sign > 0.0 { (s_x + ku, -ks) } else { (ku - cu - s_x, cs - ks) };
                if s.abs() <= arc && t.abs() <= tau && !(sign > 0.0 && k1 == 0 && k2 == 0) {
                    out.push((s, t));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(a.0.total_cmp(&b.0)));
    out
}

/// Builds `C_0 ⊂ C_1 ⊂ …` on the unstable arc of a pseudo-transitive point:
/// at level `k` every point gains a partner on the arc within stable distance
/// `eps/2^{k+1}`, so `|C_k| = 2^{k+1}`.
pub fn cantor_in_stable(m: &SurfaceMap, opts: &CantorOptions, space: &GridSpace) -> Result<CantorResult> {
    if m.kind != MapKind::SpherePseudoAnosov {
        return Err(Error::Precondition("the construction needs the sphere map".into()));
    }
    m.check_space(space)?;
    let floor = 4.0 * space.cell_size();
    let p = pseudo_transitive_point(m, opts);
    let (vu, vs) = eigenbasis();
    let at = |s: f64| m.representative((p.0 + s * vu.0, p.1 + s * vu.1));
    // coordinate along v_s of the lift nearest p
    let position = |z: (f64, f64)| {
        let lift = |z: (f64, f64)| (wrap(z.0 - p.0), wrap(z.1 - p.1));
        let (a, b) = (lift(z), lift((-z.0, -z.1)));
        let d = if a.0.hypot(a.1) <= b.0.hypot(b.1) { a } else { b };
        dot(d, vs)
    };
    let mut params = vec![0.0];
    let mut points = vec![p];
    let mut diagnostics = Vec::new();
    for level in 0..=opts.levels {
        let tau = opts.eps / 2f64.powi(level as i32 + 1);
        let current = params.clone();
        for (i, &s_x) in current.iter().enumerate() {
            let x = at(s_x);
            // every point is pushed the same way along the stable segment through p,
            // as far as tau allows, so level k nests into the binary sums of the tau_k
            let mut found: Option<(f64, f64, (f64, f64))> = None;
            let px = position(x);
            for (s, _) in stable_partners(m, p, s_x, tau, opts.arc_length) {
                let y = at(s);
                let gain = position(y) - px;
                if found.is_some_and(|(b, _, _)| gain <= b) {
                    continue;
                }
                let separated = points.iter().all(|&q| space.point_distance(q, y) >= floor);
                if separated && jointly_stable(m, space, x, y, tau, opts.horizon) {
                    found = Some((gain, s, y));
                }
            }
            let found = found.map(|(_, s, y)| (s, y));
            match found {
                Some((s, y)) => {
                    params.push(s);
                    points.push(y);
                }
                None => {
                    diagnostics.push(format!("level {level}: no partner for point {i} within {tau:.5}"));
                    return Ok(CantorResult {
                        base: p,
                        points,
                        arc_params: params,
                        level_reached: level,
                        complete: false,
                        diagnostics,
                    });
                }
            }
        }
    }
    Ok(CantorResult { base: p, points, arc_params: params, level_reached: opts.levels, complete: true, diagnostics })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansivityFloor {
    pub eps_hat: f64,
    pub resolution: u32,
    pub cell_size: f64,
    /// The pair realising the smallest orbit separation.
    pub witness: ((f64, f64), (f64, f64)),
    pub min_separation: f64,
}

fn max_separation(m: &SurfaceMap, space: &GridSpace, a: (f64, f64), b: (f64, f64), horizon: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for dir in [Direction::Stable, Direction::Unstable] {
        let oa = m.orbit_window(a, horizon, dir);
        let ob = m.orbit_window(b, horizon, dir);
        for n in 0..=horizon {
            worst = worst.max(space.point_distance(oa[n], ob[n]));
        }
    }
    worst
}

/// Largest multiple of the cell size below the smallest separation
/// `max_{|n|≤N} d(f^n a, f^n b)` over sampled pairs of points in distinct cells
/// (at least one cell size). Sampled points are the cell centers within four
/// cells of the order-two points plus `samples` seeded cells; partners are the
/// eight neighbouring centers and the reflections of the point across the
/// stable and unstable lines through each order-two point.
pub fn expansivity_floor(m: &SurfaceMap, horizon: usize, samples: usize, seed: u64, space: &GridSpace) -> Result<ExpansivityFloor> {
    m.check_space(space)?;
    let h = space.cell_size();
    let mut cells: BTreeSet<usize> = BTreeSet::new();
    for q in m.prongs() {
        cells.extend(space.ball(q, 4.0 * h).iter());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        cells.insert(rng.gen_range(0..space.len()));
    }
    let (vu, vs) = eigenbasis();
    let torsion = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)];
    let cells: Vec<usize> = cells.into_iter().collect();
    let best = cells
        .par_iter()
        .map(|&cell| {
            let a = space.center(cell);
            let mut partners: Vec<(f64, f64)> = space.neighbors8(cell).into_iter().map(|n| space.center(n)).collect();
            if m.kind != MapKind::Identity {
                for q in torsion {
                    let z = (wrap(a.0 - q.0), wrap(a.1 - q.1));
                    let (zu, zs) = (dot(z, vu), dot(z, vs));
                    partners.push((a.0 - 2.0 * zs * vs.0, a.1 - 2.0 * zs * vs.1));
                    partners.push((a.0 - 2.0 * zu * vu.0, a.1 - 2.0 * zu * vu.1));
                }
            }
            partners
                .into_iter()
                .filter(|&b| space.cell_at(b).is_some_and(|c| c != cell))
                .map(|b| (max_separation(m, space, a, b, horizon), (a, m.representative(b))))
                .min_by(|x, y| x.0.total_cmp(&y.0))
        })
        .flatten()
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .ok_or(Error::EmptySet("expansivity samples"))?;
    let eps_hat = ((best.0 / h).floor().max(1.0)) * h;
    Ok(ExpansivityFloor {
        eps_hat,
        resolution: space.resolution(),
        cell_size: h,
        witness: best.1,
        min_separation: best.0,
    })
}

/// Angle in degrees (in `(-90, 90]`) of the principal axis of a cell set,
/// with cells lifted next to `around`.
pub fn principal_axis_degrees(set: &CellSet, around: (f64, f64)) -> f64 {
    let space = set.space();
    let pts: Vec<(f64, f64)> = set.iter().map(|c| lifts_near(space, c, around)[0]).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &pts {
        let (dx, dy) = (p.0 - mx, p.1 - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let a = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let deg = a.to_degrees();
    if deg <= -90.0 { deg + 180.0 } else { deg }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CapacitorOutcome {
    Crossing(Continuum),
    /// No crossing; the last bisection interval of positions along γ.
    NotFound { interval: (usize, usize) },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacitorParams {
    pub r: f64,
    pub x: (f64, f64),
    pub delta: f64,
    pub horizon: usize,
}

/// Looks for an unstable continuum in `clos(G) ∩ B_r(x)` meeting both plates.
pub fn capacitor_cross(
    m: &SurfaceMap,
    a: &CellSet,
    b: &CellSet,
    g: &CellSet,
    params: &CapacitorParams,
    space: &GridSpace,
) -> Result<CapacitorOutcome> {
    m.check_space(space)?;
    if a.intersects(b) {
        return Err(Error::Precondition("plates not disjoint".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("empty plate".into()));
    }
    let plates = a.union(b)?;
    let ball = space.ball(params.x, params.r);
    let closure = g.union(&plates)?;
    // (∂G) ∩ B_r(x) ⊂ A ∪ B
    for cell in g.iter() {
        for n in space.neighbors4(cell) {
            if !g.contains(n) && ball.contains(n) && !plates.contains(n) {
                return Err(Error::Precondition(format!("boundary of G leaves the plates at cell {n}")));
            }
        }
    }
    // G within delta of a plate
    let dt = crate::geometry::distance_transform(&plates)?;
    let near = g.intersection(&ball)?;
    if near.iter().any(|c| dt.get(c) > params.delta) {
        return Err(Error::Precondition("G not within delta of a plate".into()));
    }
    // γ: shortest path in clos(G) ∩ B_{r/2}(x) from A to B
    let half = closure.intersection(&space.ball(params.x, params.r / 2.0))?;
    let gamma = shortest_path(space, &half, a, b)
        .ok_or_else(|| Error::Precondition("no connecting continuum γ in clos(G) ∩ B_{r/2}(x)".into()))?;
    let region = closure.intersection(&ball)?;
    let probe = |i: usize| -> Result<(bool, bool, Option<CellSet>)> {
        let spec = StablePlaqueSpec {
            base: space.center(gamma[i]),
            delta: params.delta,
            horizon: params.horizon,
            direction: Direction::Unstable,
        };
        let plaque = finite_horizon_plaque(m, &spec, space)?;
        let inside = plaque.intersection(&region)?;
        let comp = components(&inside).into_iter().find(|c| c.contains(gamma[i]));
        let Some(comp) = comp else { return Ok((false, false, None)) };
        let (ha, hb) = (comp.intersects(a), comp.intersects(b));
        Ok((ha, hb, Some(comp.into_inner())))
    };
    let (mut lo, mut hi) = (0usize, gamma.len() - 1);
    for i in [lo, hi] {
        if let (true, true, Some(c)) = probe(i)? {
            return Ok(CapacitorOutcome::Crossing(Continuum::new(c)?));
        }
    }
    while hi > lo + 1 {
        let mid = (lo + hi) / 2;
        match probe(mid)? {
            (true, true, Some(c)) => return Ok(CapacitorOutcome::Crossing(Continuum::new(c)?)),
            (true, false, _) => lo = mid,
            (false, true, _) => hi = mid,
            _ => break,
        }
    }
    Ok(CapacitorOutcome::NotFound { interval: (lo, hi) })
}

fn shortest_path(space: &GridSpace, within: &CellSet, from: &CellSet, to: &CellSet) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; space.len()];
    let mut queue: VecDeque<usize> = from.iter().filter(|&c| within.contains(c)).collect();
    for &c in &queue {
        prev[c] = c;
    }
    while let Some(c) = queue.pop_front() {
        if to.contains(c) {
            let mut path = vec![c];
            let mut cur = c;
            while prev[cur] != cur {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for n in space.neighbors8(c) {
            if within.contains(n) && prev[n] == usize::MAX {
                prev[n] = c;
                queue.push_back(n);
            }
        }
    }
    None
}

/// Diameter of a plaque's `n`-th iterate, using the plaque's line representatives.
pub fn plaque_iterate_diameters(m: &SurfaceMap, spec: &StablePlaqueSpec, space: &GridSpace) -> Result<Vec<f64>> {
    let (_, grown) = grow_plaque(m, spec, space, None)?;
    Ok((0..=spec.horizon).map(|n| grown.diameter_at(space, n)).collect())
}

/// Diameter of a continuum, re-exported for estimator reports.
pub fn continuum_diameter(c: &Continuum) -> Result<f64> {
    diameter(c)
}
