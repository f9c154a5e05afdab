use super::*;
use crate::decomposition::fields::{horizontal, vertical};
use crate::decomposition::is_cw_decomposition;
use crate::geometry::hausdorff_distance;
use crate::graphlike::make_backgammon;

fn square(res: u32) -> GridSpace {
    GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, res).unwrap()
}

fn chart(space: GridSpace, col: i64, row: i64, side: usize, f: fn(&CellSet) -> LabelField) -> (BasisBox, LabelField) {
    let bx = BasisBox::rect(space, col, row, side, side).unwrap();
    let q = f(bx.cells());
    (bx, q)
}

#[test]
fn compatibility_examples() {
    let space = square(32);
    let one = Atlas::new(vec![chart(space, 0, 0, 10, horizontal)]).unwrap();
    assert!(compatibility_check(&one).ok);
    let same = Atlas::new(vec![chart(space, 0, 0, 10, horizontal), chart(space, 5, 3, 10, horizontal)]).unwrap();
    let c = compatibility_check(&same);
    assert!(c.ok);
    assert_eq!(c.pairs, vec![(0, 1)]);
    let mixed = Atlas::new(vec![chart(space, 0, 0, 10, horizontal), chart(space, 5, 3, 10, vertical)]).unwrap();
    let c = compatibility_check(&mixed);
    assert!(!c.ok);
    let o = c.offending.unwrap();
    assert_eq!((o.first, o.second), (0, 1));
    assert!(mixed.chart_box(0).cells().contains(o.witness) && mixed.chart_box(1).cells().contains(o.witness));
    assert!(mixed.certify().is_err());
}

#[test]
fn box_preconditions() {
    let space = square(16);
    assert!(BasisBox::rect(space, 0, 0, 2, 2).is_err());
    let b = BasisBox::rect(space, -2, -2, 5, 5).unwrap();
    assert_eq!(b.cells().len(), 9);
    let t = GridSpace::torus(16).unwrap();
    assert!(BasisBox::rect(t, 0, 0, 16, 4).is_err());
    let w = BasisBox::rect(t, 14, 14, 4, 4).unwrap();
    assert_eq!(w.cells().len(), 16);
    assert!(w.disc().is_ok());
}

#[test]
fn horizontal_leaf_is_a_row() {
    let space = square(32);
    let atlas = restricted_atlas(&horizontal(&CellSet::full(space)), 8, 4).unwrap();
    assert!(atlas.covers(&CellSet::full(space)));
    assert!(compatibility_check(&atlas).ok);
    let x = space.index(13, 9);
    let l = leaf(&atlas, x).unwrap();
    let row = CellSet::from_predicate(space, |c| space.col_row(c).1 == 9);
    assert_eq!(l, row);
    // leaves from different representatives agree
    assert_eq!(leaf(&atlas, space.index(30, 9)).unwrap(), l);
    assert!(leaf(&Atlas::new(vec![chart(space, 0, 0, 4, horizontal)]).unwrap(), space.index(20, 20)).is_err());
}

#[test]
fn backgammon_has_one_leaf() {
    let bg = make_backgammon(128, 3).unwrap();
    let u = BasisBox::within(bg.q_u.domain().clone(), &bg.x).unwrap();
    let v = BasisBox::within(bg.q_v.domain().clone(), &bg.x).unwrap();
    let atlas = Atlas::new(vec![(u, bg.q_u.clone()), (v, bg.q_v.clone())]).unwrap().certify().unwrap();
    for x in [bg.x.cells()[0], bg.x.cells()[bg.x.len() / 2], *bg.x.cells().last().unwrap()] {
        assert_eq!(leaf(&atlas, x).unwrap(), bg.x);
    }
    // the component of the leaf in V is far from the V-plaque
    let p = bg.q_v.domain().cells()[bg.q_v.domain().len() / 3];
    let cc = crate::geometry::components(bg.q_v.domain()).into_iter().find(|c| c.contains(p)).unwrap();
    assert!(hausdorff_distance(&cc, bg.q_v.plaque_at(p).unwrap()).unwrap() >= 0.2);
}

#[test]
fn plaque_metric_examples() {
    let space = square(32);
    let atlas = restricted_atlas(&horizontal(&CellSet::full(space)), 8, 4).unwrap();
    let (x, y) = (space.index(2, 5), space.index(6, 5));
    let p = atlas.plaques_at(x)[0];
    assert!(atlas.plaque(p).contains(y));
    assert!(plaque_metric(&atlas, x, y).unwrap() <= atlas.plaque_diameter(p) + 1e-12);
    assert_eq!(plaque_metric(&atlas, x, space.index(2, 6)).unwrap(), f64::INFINITY);
    let chain = shortest_chain(&atlas, x, space.index(30, 5)).unwrap().unwrap();
    for w in chain.links.windows(2) {
        assert!(atlas.plaque(w[0]).intersects(atlas.plaque(w[1])));
    }
    let sum: f64 = chain.links.iter().map(|&l| atlas.plaque_diameter(l)).sum();
    assert!((sum - chain.weight).abs() < 1e-12);
}

#[test]
fn plaque_metric_is_an_extended_metric() {
    let space = square(24);
    let atlas = restricted_atlas(&horizontal(&CellSet::full(space)), 6, 2).unwrap();
    let cells: Vec<usize> = (0..24).step_by(5).flat_map(|i| [space.index(i, 3), space.index(i, 11)]).collect();
    for &a in &cells {
        let own = atlas.plaques_at(a).iter().map(|&p| atlas.plaque_diameter(p)).fold(f64::INFINITY, f64::min);
        assert!(plaque_metric(&atlas, a, a).unwrap() <= own + 1e-12);
        for &b in &cells {
            let ab = plaque_metric(&atlas, a, b).unwrap();
            assert_eq!(ab, plaque_metric(&atlas, b, a).unwrap());
            assert!(space.metric(a, b) <= ab + 1e-12);
            for &c in &cells {
                let (bc, ac) = (plaque_metric(&atlas, b, c).unwrap(), plaque_metric(&atlas, a, c).unwrap());
                assert!(ac <= ab + bc + 1e-9);
            }
        }
    }
}

#[test]
fn genericity_counts_the_triod_leaf() {
    let space = square(32);
    let all = CellSet::full(space);
    assert_eq!(leaf_genericity_report(&restricted_atlas(&horizontal(&all), 8, 4).unwrap(), 100, 1).unwrap().fraction, 1.0);
    // row 10 with a stem rising from column 16
    let key = |c: usize| {
        let (i, j) = space.col_row(c);
        if j == 10 || (j > 10 && i == 16) {
            (0, 0)
        } else {
            (1, j * 2 + usize::from(i > 16))
        }
    };
    let field = LabelField::from_keys(&all, key);
    let atlas = restricted_atlas(&field, 8, 4).unwrap();
    assert!(compatibility_check(&atlas).ok);
    let triod = leaf(&atlas, space.index(0, 10)).unwrap();
    assert_eq!(triod.len(), 32 + 21);
    let r = leaf_genericity_report(&atlas, usize::MAX, 0).unwrap();
    assert_eq!(r.samples, 32 * 32);
    assert_eq!(r.branch_free, 32 * 32 - triod.len());
    assert!(r.ramified_plaques >= 1);
}

#[test]
fn compactness_probe_examples() {
    let space = GridSpace::rectangle(-1.0, 1.0, -1.0, 1.0, 16).unwrap();
    let rings = LabelField::from_keys(&CellSet::full(space), |c| {
        let (i, j) = space.col_row(c);
        (i as i64 - 16).max(15 - i as i64).max(j as i64 - 16).max(15 - j as i64)
    });
    let atlas = restricted_atlas(&rings, 6, 3).unwrap();
    for i in [0, 5, 12] {
        assert!(leaf_compactness_probe(&atlas, space.index(i, 16)).unwrap().finite_cover);
    }
    let single = Atlas::new(vec![chart(square(8), 0, 0, 8, |s| LabelField::from_keys(s, |_| 0))]).unwrap();
    let p = leaf_compactness_probe(&single, 0).unwrap();
    assert!(p.finite_cover && p.leaf_plaques == 1);
}

#[test]
fn torus_stable_atlas() {
    let m = SurfaceMap::torus_anosov();
    let space = m.space(256).unwrap();
    let atlas = stable_atlas(&m, 0.15, 10, 0.1, &space).unwrap();
    assert!(atlas.certificate().is_some());
    assert!(atlas.scale() <= 0.1);
    assert!(atlas.covers(&CellSet::full(space)));
    for i in (0..atlas.chart_count()).step_by(37) {
        let v = is_cw_decomposition(&atlas.chart_field(i), &atlas.chart_box(i).disc().unwrap()).unwrap();
        assert!(v.ok, "{:?}", v.diagnostics);
    }
    // the leaf through the fixed point carries half a unit of its stable line
    let l = leaf(&atlas, 0).unwrap();
    let (_, vs) = crate::dynamics::eigenbasis();
    for k in 0..=200 {
        let t = 0.5 * k as f64 / 200.0;
        let p = ((t * vs.0).rem_euclid(1.0), (t * vs.1).rem_euclid(1.0));
        assert!(l.contains(space.cell_at(p).unwrap()));
    }
    let probe = leaf_compactness_probe(&atlas, 0).unwrap();
    assert!(!probe.finite_cover);
    assert!(leaf_genericity_report(&atlas, 200, 3).unwrap().fraction >= 0.95);
    assert!(stable_atlas(&m, 0.15, 10, 0.2, &space).is_err());
    assert!(stable_atlas(&SurfaceMap::identity(), 0.15, 10, 0.1, &space).is_err());
}

#[test]
fn line_normals() {
    let (_, vs) = crate::dynamics::eigenbasis();
    let (a, b) = line_normal(vs, 512);
    assert_eq!(a.abs() + b.abs(), 512);
    // normal is perpendicular to the stable direction up to the quantization
    assert!((a as f64 * vs.0 + b as f64 * vs.1).abs() < 2.0);
}
