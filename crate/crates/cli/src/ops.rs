//! Builds the scenario source once and runs each analysis against it.

use anyhow::{bail, Result};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use cwlab::atlas::{self, Atlas, BasisBox};
use cwlab::decomposition::{self as dec, fields, DiscDomain, LabelField};
use cwlab::dynamics::{self as dyn_, CantorOptions, Direction, StablePlaqueSpec, SurfaceMap};
use cwlab::geometry::{self, components, hausdorff_distance, CellSet, GridSpace};
use cwlab::graphlike::{self as gl, Backgammon, FlowDecomposition, GraphLikeContinuum};

use crate::out::Sink;
use crate::scenario::{Analysis, Dir, Generator, MapName, Source};

pub enum Built {
    Field { field: LabelField, disc: DiscDomain, flow: Option<Box<FlowDecomposition>> },
    Backgammon(Box<Backgammon>),
    Set(CellSet),
    Map { map: SurfaceMap, space: GridSpace },
}

fn graphlike(g: Generator, res: u32) -> Result<GraphLikeContinuum> {
    Ok(match g {
        Generator::HorizontalSegment => gl::make_horizontal_segment(res)?,
        Generator::Cocarc => gl::make_cocarc(res)?,
        Generator::SinOneOverX => gl::make_sin_one_over_x(res)?,
        Generator::CantorSquare => gl::make_cantor_square(res)?,
        _ => unreachable!("not a graph-like generator"),
    })
}

/// The decomposition named by a generator at one resolution.
fn field_at(g: Generator, res: u32, slope: Option<f64>) -> Result<(LabelField, DiscDomain, Option<Box<FlowDecomposition>>)> {
    Ok(match g {
        Generator::Horizontal | Generator::Vertical => {
            let disc = fields::unit_square(res)?;
            let f = if g == Generator::Horizontal { fields::horizontal(disc.cells()) } else { fields::vertical(disc.cells()) };
            (f, disc, None)
        }
        Generator::Sheared => {
            let (disc, f) = fields::sheared(res, slope.unwrap_or(0.3))?;
            (f, disc, None)
        }
        _ => {
            let flow = gl::flow_decomposition(&graphlike(g, res)?)?;
            let disc = DiscDomain::new(flow.field.domain().clone())?;
            (flow.field.clone(), disc, Some(Box::new(flow)))
        }
    })
}

pub fn build(source: &Source) -> Result<Built> {
    Ok(match *source {
        Source::Generator { name: Generator::Backgammon, resolution, depth, .. } => {
            Built::Backgammon(Box::new(gl::make_backgammon(resolution, depth.unwrap_or(3))?))
        }
        Source::Generator { name: Generator::AnomalousStableSet, resolution, .. } => Built::Set(gl::make_anomalous_stable_set(resolution)?),
        Source::Generator { name, resolution, slope, .. } => {
            let (field, disc, flow) = field_at(name, resolution, slope)?;
            Built::Field { field, disc, flow }
        }
        Source::Map { name, resolution } => {
            let map = match name {
                MapName::Torus => SurfaceMap::torus_anosov(),
                MapName::Sphere => SurfaceMap::sphere_pseudo_anosov(),
                MapName::Identity => SurfaceMap::identity(),
            };
            let space = map.space(resolution)?;
            Built::Map { map, space }
        }
    })
}

#[derive(Serialize)]
struct QuotientSummary {
    plaques: usize,
    edges: usize,
    is_connected: bool,
    is_tree: bool,
    is_path: bool,
    max_degree: usize,
}

#[derive(Serialize)]
struct FlowSummary {
    plaques: usize,
    upper_bands: usize,
    lower_bands: usize,
    capped: bool,
    quotient_is_path: bool,
    contact_mismatch: f64,
}

#[derive(Serialize)]
struct DefectRow {
    resolution: u32,
    cell_size: f64,
    upper_defect: f64,
    symmetric_defect: f64,
}

#[derive(Serialize)]
struct CwnRow {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    count: usize,
}

#[derive(Serialize)]
struct LocalComponents {
    center: (f64, f64),
    radius: f64,
    exclude_baseline: bool,
    components: usize,
    set_components: usize,
}

#[derive(Serialize)]
struct BackgammonLeaf {
    leaf_cells: usize,
    x_cells: usize,
    leaf_equals_x: bool,
    /// Hausdorff distance between cc_p(leaf ∩ V) and Q_V(p) per sampled p.
    gaps: Vec<(usize, f64)>,
    min_gap: f64,
}

#[derive(Serialize)]
struct PlaqueReport {
    base: (f64, f64),
    cells: usize,
    diameter: f64,
    axis_degrees: f64,
    iterate_diameters: Vec<f64>,
}

#[derive(Serialize)]
struct AtlasReport {
    charts: usize,
    plaques: usize,
    scale: f64,
    compatibility: atlas::Compatibility,
    genericity: atlas::GenericityReport,
    fixed_point_leaf: atlas::CompactnessProbe,
    /// Largest distance from a sampled cell to its leaf, a lower bound of the leaf diameter.
    leaf_reach: Vec<(usize, f64)>,
}

pub fn run(a: &Analysis, source: &Source, built: &Built, seed: Option<u64>, sink: &mut Sink) -> Result<()> {
    let seed = seed.unwrap_or(0);
    match (a, built) {
        (Analysis::Quotient, Built::Field { field, .. }) => {
            let g = dec::quotient_graph(field);
            let summary = QuotientSummary {
                plaques: g.nodes,
                edges: g.edges.len(),
                is_connected: g.is_connected(),
                is_tree: g.is_tree(),
                is_path: g.is_path(),
                max_degree: (0..g.nodes).map(|v| g.degree(v)).max().unwrap_or(0),
            };
            sink.json(".json", "quotient_graph", &summary)
        }
        (Analysis::Cw, Built::Field { field, disc, .. }) => sink.json(".json", "is_cw_decomposition", &dec::is_cw_decomposition(field, disc)?),
        (Analysis::Flow, Built::Field { flow: Some(flow), .. }) => {
            let summary = FlowSummary {
                plaques: flow.field.plaque_count(),
                upper_bands: flow.upper_bands,
                lower_bands: flow.lower_bands,
                capped: flow.capped,
                quotient_is_path: dec::quotient_graph(&flow.field).is_path(),
                contact_mismatch: flow.contact_mismatch()?,
            };
            sink.json(".json", "flow_decomposition", &summary)
        }
        (Analysis::Semicontinuity { point, resolutions }, Built::Field { .. }) => semicontinuity(source, *point, resolutions, sink),
        (Analysis::Render, Built::Field { field, .. }) => sink.labels("label_field", field.space(), field.raw_labels()),
        (Analysis::Render, Built::Backgammon(bg)) => sink.mask("make_backgammon", &bg.x),
        (Analysis::Render, Built::Set(set)) => sink.mask("make_anomalous_stable_set", set),
        (Analysis::LocalComponents { center, radius, exclude_baseline }, Built::Field { .. } | Built::Set(_) | Built::Backgammon(_)) => {
            let set = match built {
                Built::Field { field, .. } => field.domain().clone(),
                Built::Set(s) => s.clone(),
                Built::Backgammon(bg) => bg.x.clone(),
                Built::Map { .. } => unreachable!(),
            };
            let baseline = exclude_baseline.then(|| gl::anomalous_baseline(set.space()));
            let report = LocalComponents {
                center: *center,
                radius: *radius,
                exclude_baseline: *exclude_baseline,
                components: gl::local_component_count(&set, *center, *radius, baseline.as_ref())?,
                set_components: components(&set).len(),
            };
            sink.json(".json", "local_component_count", &report)
        }
        (Analysis::BackgammonLeaf { samples }, Built::Backgammon(bg)) => {
            let u = BasisBox::within(bg.q_u.domain().clone(), &bg.x)?;
            let v = BasisBox::within(bg.q_v.domain().clone(), &bg.x)?;
            let atlas = Atlas::new(vec![(u, bg.q_u.clone()), (v, bg.q_v.clone())])?.certify()?;
            let leaf = atlas::leaf(&atlas, bg.x.cells()[0])?;
            let vdom = bg.q_v.domain();
            let in_v = leaf.intersection(vdom)?;
            let pieces = components(&in_v);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picks = sample(&mut rng, vdom.len(), (*samples).min(vdom.len())).into_vec();
            let mut gaps = Vec::new();
            for i in picks {
                let p = vdom.cells()[i];
                let cc = pieces.iter().find(|c| c.contains(p)).expect("leaf covers V");
                gaps.push((p, hausdorff_distance(cc, bg.q_v.plaque_at(p).unwrap())?));
            }
            let min_gap = gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
            let report = BackgammonLeaf { leaf_cells: leaf.len(), x_cells: bg.x.len(), leaf_equals_x: leaf == bg.x, gaps, min_gap };
            sink.json(".json", "leaf", &report)
        }
        (Analysis::Plaque { base, delta, horizon, direction }, Built::Map { map, space }) => {
            let direction = match direction {
                Dir::Stable => Direction::Stable,
                Dir::Unstable => Direction::Unstable,
            };
            let spec = StablePlaqueSpec { base: *base, delta: *delta, horizon: *horizon, direction };
            let p = dyn_::finite_horizon_plaque(map, &spec, space)?;
            let report = PlaqueReport {
                base: *base,
                cells: p.len(),
                diameter: geometry::diameter(&p)?,
                axis_degrees: dyn_::principal_axis_degrees(&p, *base),
                iterate_diameters: dyn_::plaque_iterate_diameters(map, &spec, space)?,
            };
            sink.json(".json", "finite_horizon_plaque", &report)?;
            sink.mask("finite_horizon_plaque", &p)
        }
        (Analysis::Cwn { delta, horizon, samples }, Built::Map { map, space }) => {
            let r = dyn_::cwn_estimate(map, *delta, *horizon, *samples, seed, space)?;
            sink.json(".json", "cwn_estimate", &r)?;
            sink.csv(".csv", "cwn_estimate", r.samples.iter().map(|s| CwnRow { x0: s.x.0, x1: s.x.1, y0: s.y.0, y1: s.y.1, count: s.count }))
        }
        (Analysis::Expansivity { horizon, samples }, Built::Map { map, space }) => {
            sink.json(".json", "expansivity_floor", &dyn_::expansivity_floor(map, *horizon, *samples, seed, space)?)
        }
        (Analysis::Cantor { eps, levels, horizon }, Built::Map { map, space }) => {
            let opts = CantorOptions { eps: *eps, levels: *levels, horizon: *horizon, seed, ..CantorOptions::default() };
            sink.json(".json", "cantor_in_stable", &dyn_::cantor_in_stable(map, &opts, space)?)
        }
        (Analysis::StableAtlas { delta, horizon, scale, samples }, Built::Map { map, space }) => {
            let atlas = atlas::stable_atlas(map, *delta, *horizon, *scale, space)?;
            let genericity = atlas::leaf_genericity_report(&atlas, *samples, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut leaf_reach = Vec::new();
            for x in sample(&mut rng, space.len(), 4.min(space.len())).into_vec() {
                let l = atlas::leaf(&atlas, x)?;
                leaf_reach.push((x, l.iter().map(|c| space.metric(x, c)).fold(0.0, f64::max)));
            }
            let report = AtlasReport {
                charts: atlas.chart_count(),
                plaques: atlas.plaque_count(),
                scale: atlas.scale(),
                compatibility: atlas::compatibility_check(&atlas),
                genericity,
                fixed_point_leaf: atlas::leaf_compactness_probe(&atlas, 0)?,
                leaf_reach,
            };
            sink.json(".json", "stable_atlas", &report)
        }
        (a, _) => bail!("{} does not apply to this source", a.op()),
    }
}

/// Semicontinuity regenerates the field at each resolution.
fn semicontinuity(source: &Source, point: (f64, f64), resolutions: &[u32], sink: &mut Sink) -> Result<()> {
    let Source::Generator { name, slope, .. } = *source else { bail!("semicontinuity needs a generator source") };
    let generator = |res: u32| field_at(name, res, slope).map(|f| f.0).map_err(|e| match e.downcast::<cwlab::Error>() {
        Ok(e) => e,
        Err(e) => cwlab::Error::Precondition(e.to_string()),
    });
    let r = dec::semicontinuity_profile(&generator, point, resolutions)?;
    sink.json(".json", "semicontinuity_profile", &r)?;
    sink.csv(
        ".csv",
        "semicontinuity_profile",
        r.levels.iter().map(|l| DefectRow { resolution: l.resolution, cell_size: l.cell_size, upper_defect: l.upper_defect, symmetric_defect: l.symmetric_defect }),
    )
}
