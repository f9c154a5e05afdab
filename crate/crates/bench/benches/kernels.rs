use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use cwlab::atlas::{self, restricted_atlas};
use cwlab::decomposition::{fields, quotient_graph};
use cwlab::dynamics::{cwn_estimate, finite_horizon_plaque, Direction, StablePlaqueSpec, SurfaceMap};
use cwlab::geometry::{distance_transform, hausdorff_distance, whitney_size, CellSet, GridSpace};
use cwlab::graphlike::{flow_decomposition, make_cocarc};

fn geometry(c: &mut Criterion) {
    let mut g = c.benchmark_group("geometry");
    for res in [128u32, 256, 512] {
        let s = GridSpace::torus(res).unwrap();
        let a = CellSet::from_predicate(s, |i| s.col_row(i).0 == s.col_row(i).1);
        let b = CellSet::from_predicate(s, |i| s.col_row(i).1 == res as usize / 3);
        g.bench_with_input(BenchmarkId::new("distance_transform", res), &a, |bn, a| bn.iter(|| distance_transform(black_box(a)).unwrap()));
        g.bench_with_input(BenchmarkId::new("hausdorff", res), &(a.clone(), b), |bn, (a, b)| bn.iter(|| hausdorff_distance(a, b).unwrap()));
    }
    let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 128).unwrap();
    let blob = CellSet::from_predicate(s, |i| {
        let (c, r) = s.col_row(i);
        (c as i64 - 60).pow(2) + (r as i64 - 70).pow(2) < 400
    });
    g.bench_function("whitney_size/128", |bn| bn.iter(|| whitney_size(black_box(&blob)).unwrap()));
    g.finish();
}

fn decomposition(c: &mut Criterion) {
    let mut g = c.benchmark_group("decomposition");
    g.sample_size(10);
    let (_, sheared) = fields::sheared(256, 0.3).unwrap();
    g.bench_function("quotient_graph/sheared256", |bn| bn.iter(|| quotient_graph(black_box(&sheared))));
    let cocarc = make_cocarc(256).unwrap();
    g.bench_function("flow_decomposition/cocarc256", |bn| bn.iter(|| flow_decomposition(black_box(&cocarc)).unwrap()));
    g.finish();
}

fn dynamics(c: &mut Criterion) {
    let mut g = c.benchmark_group("dynamics");
    g.sample_size(10);
    let m = SurfaceMap::torus_anosov();
    let space = m.space(512).unwrap();
    let spec = StablePlaqueSpec { base: (0.3, 0.7), delta: 0.15, horizon: 10, direction: Direction::Stable };
    g.bench_function("finite_horizon_plaque/torus512", |bn| bn.iter(|| finite_horizon_plaque(&m, black_box(&spec), &space).unwrap()));
    let small = m.space(256).unwrap();
    g.bench_function("cwn_estimate/torus256x10", |bn| bn.iter(|| cwn_estimate(&m, 0.15, 10, 10, 1, &small).unwrap()));
    g.finish();
}

fn atlases(c: &mut Criterion) {
    let mut g = c.benchmark_group("atlas");
    g.sample_size(10);
    let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 128).unwrap();
    let field = fields::horizontal(&CellSet::full(s));
    let a = restricted_atlas(&field, 16, 8).unwrap();
    g.bench_function("restricted_atlas/128", |bn| bn.iter(|| restricted_atlas(black_box(&field), 16, 8).unwrap()));
    g.bench_function("plaque_metric/128", |bn| bn.iter(|| atlas::plaque_metric(&a, s.index(1, 40), s.index(120, 40)).unwrap()));
    g.finish();
}

criterion_group!(benches, geometry, decomposition, dynamics, atlases);
criterion_main!(benches);
