use super::*;
use crate::decomposition::quotient_graph;

fn cells_of(space: GridSpace, cells: &[(usize, usize)]) -> CellSet {
    CellSet::new(space, cells.iter().map(|&(c, r)| space.index(c, r))).unwrap()
}

#[test]
fn validation_reasons() {
    let space = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 8).unwrap();
    let row: Vec<_> = (0..8).map(|c| (c, 3)).collect();
    assert!(validate_graphlike(&cells_of(space, &row)).ok);

    let mut gap = row.clone();
    gap.push((4, 5));
    let v = validate_graphlike(&cells_of(space, &gap));
    assert_eq!((v.ok, v.column), (false, Some(4)));
    assert!(v.reason.unwrap().contains("not connected"));

    let mut missing = row.clone();
    missing.remove(2);
    assert_eq!(validate_graphlike(&cells_of(space, &missing)).column, Some(2));

    // columns meeting only diagonally
    let stair: Vec<_> = (0..8).map(|c| (c, if c < 4 { 3 } else { 4 })).collect();
    let v = validate_graphlike(&cells_of(space, &stair));
    assert_eq!(v.column, Some(4));
    assert!(v.reason.unwrap().contains("shares no row"));

    let low: Vec<_> = (0..8).map(|c| (c, 0)).collect();
    assert!(!validate_graphlike(&cells_of(space, &low)).ok);

    let mut block = row.clone();
    block.extend([(3, 4), (4, 4), (5, 4), (3, 2), (4, 2), (5, 2)]);
    let v = validate_graphlike(&cells_of(space, &block));
    assert!(v.reason.unwrap().contains("3×3"));
}

#[test]
fn arrival_time_matches_log() {
    // dist(p, I×{0}) = y, so T(x, y) = ∫_y^1 ds/s = -ln y
    let c = make_horizontal_segment(256).unwrap();
    let flow = flow_decomposition(&c).unwrap();
    let space = c.space();
    let mut checked = 0;
    for cell in 0..space.len() {
        let (_, y) = space.center(cell);
        if (0.05..=0.95).contains(&y) {
            let want = -y.ln();
            assert!((flow.t(cell) - want).abs() <= 0.01 * want, "y={y}: {} vs {want}", flow.t(cell));
            checked += 1;
        }
    }
    assert!(checked > 200);
    assert!(!flow.capped);
    for cell in c.cells().iter() {
        assert!(flow.t(cell).is_infinite());
    }
}

#[test]
fn level_bands_on_equal_columns() {
    let cols = vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]];
    assert_eq!(level_bands(&cols), vec![vec![0, 1, 2], vec![0, 1, 2]]);
    // a slow column pulls the level up for its neighbours
    let cols = vec![vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 3.0]];
    assert_eq!(level_bands(&cols), vec![vec![0, 1, 1, 1], vec![0, 1]]);
}

fn assert_path(c: &GraphLikeContinuum) -> FlowDecomposition {
    let flow = flow_decomposition(c).unwrap();
    let g = quotient_graph(&flow.field);
    assert!(g.is_path(), "quotient is not a path ({} plaques)", g.nodes);
    // C is an interior plaque of the path
    assert_eq!(g.degree(flow.c_plaque()), 2);
    for band in 0..flow.field.plaque_count() {
        assert!(flow.field.plaque(band).is_connected());
    }
    flow
}

#[test]
fn flow_quotients_are_paths() {
    assert_path(&make_horizontal_segment(64).unwrap());
    assert_path(&make_cocarc(128).unwrap());
    assert_path(&make_sin_one_over_x(128).unwrap());
    assert_path(&make_cantor_square(128).unwrap());
}

#[test]
fn sin_curve_peak_column() {
    let c = make_sin_one_over_x(512).unwrap();
    let space = c.space();
    let col = space.cell_at((2.0 / std::f64::consts::PI, 0.0)).map(|cell| space.col_row(cell).0).unwrap();
    let (lo, hi) = c.slice(col);
    let mid = 0.5 * (space.center(space.index(col, lo)).1 + space.center(space.index(col, hi)).1);
    assert!((mid - 1.0).abs() <= 2.0 * space.cell_size(), "mid {mid}");
    let axis = space.cell_at((0.0, 0.0)).map(|cell| space.col_row(cell).0).unwrap();
    let (lo, hi) = c.slice(axis);
    assert!((space.center(space.index(axis, lo)).1 + 1.0).abs() < 1e-9);
    assert!((space.center(space.index(axis, hi)).1 - 1.0).abs() < 1e-9);
    // the curve is odd
    let w = space.width();
    for k in 0..w {
        let (a, b) = c.slice(k);
        let (ma, mb) = c.slice(w - 1 - k);
        assert_eq!(a + mb, space.height() - 1);
        assert_eq!(b + ma, space.height() - 1);
    }
}

#[test]
fn cantor_membership() {
    assert!(in_cantor(0, 1, 5));
    assert!(in_cantor(1, 3, 5));
    assert!(in_cantor(2, 3, 5));
    assert!(!in_cantor(1, 2, 5));
    assert!(in_cantor(2, 9, 5));
    assert!(!in_cantor(4, 27, 5));
    assert!(in_cantor(3, 3, 5));
}

#[test]
fn ternary_map_values() {
    assert_eq!(ternary_binary_map(0.0).unwrap(), 0.0);
    assert!((ternary_binary_map(2.0 / 3.0).unwrap() - 0.5).abs() < 1e-12);
    assert!((ternary_binary_map(2.0 / 9.0 + 2.0 / 27.0).unwrap() - 0.375).abs() < 1e-12);
    assert!((ternary_binary_map(1.0 / 3.0).unwrap() - 0.5).abs() < 1e-12);
    assert!((ternary_binary_map(1.0).unwrap() - 1.0).abs() < 1e-12);
    let e = ternary_binary_map(0.5).unwrap_err().to_string();
    assert!(e.contains("position 1"), "{e}");
    let e = ternary_binary_map(0.4 / 3.0 + 0.0).unwrap_err().to_string();
    assert!(e.contains("digit 1"), "{e}");
    assert!(ternary_binary_map(1.5).is_err());
}

#[test]
fn backgammon_fibres() {
    let bg = make_backgammon(256, 4).unwrap();
    assert!(bg.x.is_connected());
    assert_eq!(bg.q_u.plaque_count(), 1);
    let space = *bg.x.space();
    // a point high on I_{2/3}: its plaque holds the tops of both g = 1/2 segments
    let s = bg.segments.iter().find(|s| (s.a - 2.0 / 3.0).abs() < 1e-12).unwrap();
    assert!((s.g - 0.5).abs() < 1e-12);
    let p = (s.a + 0.9 * (s.g - s.a), 0.9);
    let cell = bg.x.iter().min_by(|&a, &b| {
        let d = |c| {
            let (x, y) = space.center(c);
            (x - p.0).hypot(y - p.1)
        };
        d(a).total_cmp(&d(b))
    }).unwrap();
    let plaque = bg.q_v.plaque(bg.q_v.label(cell).unwrap());
    let foot = |a: f64| space.cell_at((a + 0.4 * (0.5 - a), 0.4)).unwrap();
    let partner = bg.segments.iter().find(|t| t.fiber == s.fiber && t.a != s.a).unwrap();
    assert!((partner.a - 1.0 / 3.0).abs() < 1e-12);
    for a in [s.a, partner.a] {
        let hit = plaque.iter().any(|c| space.point_distance(space.center(c), space.center(foot(a))) < 2.0 * space.cell_size());
        assert!(hit, "segment from {a} missing");
    }
    // nothing from the segment at 0
    assert!(plaque.iter().all(|c| space.center(c).0 > 0.2));
}

#[test]
fn anomalous_set_counts() {
    let fs = make_anomalous_stable_set(512).unwrap();
    let space = *fs.space();
    assert!(fs.is_connected());
    let base = anomalous_baseline(&space);
    let whole = local_component_count(&fs, (0.0, 0.0), 0.1, None).unwrap();
    assert_eq!(whole, 1);
    let above = local_component_count(&fs, (0.0, 0.0), 0.1, Some(&base)).unwrap();
    assert!(above >= 3, "{above}");
}

#[test]
fn contact_sets_separate_the_examples() {
    let row = flow_decomposition(&make_horizontal_segment(64).unwrap()).unwrap();
    assert_eq!(row.contact_mismatch().unwrap(), 0.0);
    // the spike touches only the region above
    for res in [64, 128] {
        let c = flow_decomposition(&make_cocarc(res).unwrap()).unwrap();
        assert!(c.contact_mismatch().unwrap() >= 0.45);
    }
    let m: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&r| flow_decomposition(&make_sin_one_over_x(r).unwrap()).unwrap().contact_mismatch().unwrap())
        .collect();
    assert!(m[0] > m[1] && m[1] > m[2] && m[2] < 0.2, "{m:?}");
}
