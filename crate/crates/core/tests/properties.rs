use std::sync::OnceLock;

use proptest::prelude::*;

use cwlab::atlas::{self, restricted_atlas, Atlas};
use cwlab::decomposition::{fields, monotone_restriction, LabelField};
use cwlab::dynamics::{orbit, SurfaceMap};
use cwlab::geometry::{components, hausdorff_distance, whitney_size, CellSet, GridSpace};
use cwlab::oracle;
use cwlab::raster::{read_cellset, write_cellset};

const RES: u32 = 24;

fn space(kind: u8) -> GridSpace {
    match kind % 4 {
        0 => GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, RES).unwrap(),
        1 => GridSpace::vertex_centered(0.0, 1.0, 0.0, 1.0, RES).unwrap(),
        2 => GridSpace::torus(RES).unwrap(),
        _ => GridSpace::sphere(RES).unwrap(),
    }
}

fn set(s: GridSpace, raw: &[usize]) -> CellSet {
    CellSet::new(s, raw.iter().map(|c| c % s.len())).unwrap()
}

fn cells() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<usize>(), 1..40)
}

fn wrapped(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = |x: f64| x - x.round();
    d(a.0 - b.0).hypot(d(a.1 - b.1))
}

fn horizontal_atlas() -> &'static Atlas {
    static A: OnceLock<Atlas> = OnceLock::new();
    A.get_or_init(|| {
        let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 32).unwrap();
        restricted_atlas(&fields::horizontal(&CellSet::full(s)), 8, 4).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_a_metric(kind: u8, a in cells(), b in cells(), c in cells()) {
        let s = space(kind);
        let (a, b, c) = (set(s, &a), set(s, &b), set(s, &c));
        let h = |x: &CellSet, y: &CellSet| hausdorff_distance(x, y).unwrap();
        prop_assert_eq!(h(&a, &b), oracle::hausdorff(&a, &b));
        prop_assert_eq!(h(&a, &b), h(&b, &a));
        prop_assert_eq!(h(&a, &b) == 0.0, a == b);
        prop_assert!(h(&a, &c) <= h(&a, &b) + h(&b, &c) + 1e-12);
    }

    #[test]
    fn whitney_grows_with_the_set(kind: u8, a in cells(), extra in cells()) {
        let s = space(kind);
        let small = set(s, &a);
        let big = set(s, &[a.clone(), extra].concat());
        let (ms, mb) = (whitney_size(&small).unwrap(), whitney_size(&big).unwrap());
        prop_assert!((ms - oracle::whitney(&small)).abs() < 1e-9);
        if big == small {
            prop_assert_eq!(ms, mb);
        } else {
            prop_assert!(ms < mb);
        }
    }

    #[test]
    fn restriction_matches_the_oracle(which in 0u8..3, keep in prop::collection::vec(any::<bool>(), 64..512)) {
        let disc = fields::unit_square(RES).unwrap();
        let q = match which {
            0 => fields::horizontal(disc.cells()),
            1 => fields::vertical(disc.cells()),
            _ => fields::sheared(RES, 0.4).unwrap().1,
        };
        let y = CellSet::from_predicate(*q.space(), |c| keep[c % keep.len()] && q.domain().contains(c));
        prop_assume!(!y.is_empty());
        let r = monotone_restriction(&q, &y).unwrap();
        prop_assert_eq!(oracle::plaque_sets(&r), oracle::restriction(&q, &y));
        prop_assert_eq!(monotone_restriction(&r, &y).unwrap(), r);
    }

    #[test]
    fn container_round_trips(kind: u8, a in cells()) {
        let a = set(space(kind), &a);
        let mut buf = Vec::new();
        write_cellset(&a, &mut buf).unwrap();
        prop_assert_eq!(read_cellset(&buf[..]).unwrap(), a);
    }

    // the f64 hand-off between the two calls is the only rounding; it grows
    // by at most lambda per step on the way back
    #[test]
    fn orbits_invert(x in 0.0f64..1.0, y in 0.0f64..1.0, n in -30i64..30) {
        let m = SurfaceMap::torus_anosov();
        let tol = 4.0 * f64::EPSILON * cwlab::dynamics::anosov_lambda().powi(n.abs() as i32) + 1e-15;
        let back = orbit(&m, orbit(&m, (x, y), n), -n);
        prop_assert!(wrapped(back, (x, y)) < tol, "{:?} vs {:?}", back, (x, y));
        let s = SurfaceMap::sphere_pseudo_anosov();
        let p = orbit(&s, (x, y), 0);
        let back = orbit(&s, orbit(&s, p, n), -n);
        prop_assert!(wrapped(back, p).min(wrapped(back, (-p.0, -p.1))) < tol);
    }

    #[test]
    fn label_fields_partition_the_domain(kind: u8, a in cells(), modulus in 1usize..6) {
        let s = space(kind);
        let domain = set(s, &a).dilate(1);
        let q = LabelField::from_keys(&domain, |c| c % modulus);
        let mut seen = vec![false; s.len()];
        for (id, p) in q.plaques().iter().enumerate() {
            prop_assert_eq!(components(p).len(), 1);
            for c in p.iter() {
                prop_assert!(!seen[c]);
                seen[c] = true;
                prop_assert_eq!(q.label(c), Some(id));
            }
        }
        prop_assert!(domain.iter().all(|c| seen[c]));
        prop_assert_eq!(seen.iter().filter(|&&b| b).count(), domain.len());
    }

    #[test]
    fn plaque_metric_dominates_the_metric(p in 0usize..1024, q in 0usize..1024, same_row: bool) {
        let a = horizontal_atlas();
        let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 32).unwrap();
        let q = if same_row { s.index(q % 32, s.col_row(p).1) } else { q };
        let d = atlas::plaque_metric(a, p, q).unwrap();
        prop_assert!(s.metric(p, q) <= d + 1e-12);
        prop_assert_eq!(d.is_finite(), s.col_row(p).1 == s.col_row(q).1);
    }
}
