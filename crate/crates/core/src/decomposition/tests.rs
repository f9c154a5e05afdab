use super::fields::*;
use super::*;
use crate::geometry::GridSpace;

fn square(res: u32) -> (DiscDomain, LabelField) {
    let d = unit_square(res).unwrap();
    let q = horizontal(d.cells());
    (d, q)
}

#[test]
fn euler_characteristic_of_basic_shapes() {
    let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 16).unwrap();
    let block = CellSet::from_predicate(s, |c| {
        let (i, j) = s.col_row(c);
        (2..6).contains(&i) && (2..6).contains(&j)
    });
    assert_eq!(euler_characteristic(&block), 1);
    let ring = CellSet::from_predicate(s, |c| {
        let (i, j) = s.col_row(c);
        (2..7).contains(&i) && (2..7).contains(&j) && !(i == 4 && j == 4)
    });
    assert_eq!(euler_characteristic(&ring), 0);
    let t = GridSpace::torus(8).unwrap();
    assert_eq!(euler_characteristic(&CellSet::full(t)), 0);
    let sp = GridSpace::sphere(8).unwrap();
    assert_eq!(euler_characteristic(&CellSet::full(sp)), 2);
    // a band around the torus is an annulus
    let band = CellSet::from_predicate(t, |c| t.col_row(c).1 == 3);
    assert_eq!(euler_characteristic(&band), 0);
}

#[test]
fn dendrite_proxy_flags() {
    let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 16).unwrap();
    let row = CellSet::from_predicate(s, |c| s.col_row(c).1 == 3);
    assert!(dendrite_proxy(&row).is_ok());
    let fat = CellSet::from_predicate(s, |c| s.col_row(c).1 < 3);
    assert!(dendrite_proxy(&fat).unwrap_err().contains("interior"));
    let two = CellSet::new(s, [0, 5]).unwrap();
    assert!(dendrite_proxy(&two).unwrap_err().contains("components"));
}

#[test]
fn labels_are_dense_and_ordered_by_lowest_cell() {
    let (_, q) = square(16);
    assert_eq!(q.plaque_count(), 16);
    for (id, p) in q.plaques().iter().enumerate() {
        assert_eq!(q.label(p.cells()[0]), Some(id));
    }
    let firsts: Vec<usize> = q.plaques().iter().map(|p| p.cells()[0]).collect();
    assert!(firsts.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn from_labels_rejects_disconnected_class() {
    let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 8).unwrap();
    let all = CellSet::full(s);
    let labels: Vec<u32> = (0..s.len()).map(|c| (s.col_row(c).0 % 2) as u32).collect();
    assert!(LabelField::from_labels(&all, &labels).is_err());
    let rows: Vec<u32> = (0..s.len()).map(|c| s.col_row(c).1 as u32).collect();
    assert_eq!(LabelField::from_labels(&all, &rows).unwrap(), horizontal(&all));
}

#[test]
fn restriction_identity_and_disc_chords() {
    let (d, q) = square(32);
    assert_eq!(monotone_restriction(&q, d.cells()).unwrap(), q);
    let s = *d.cells().space();
    let disc = s.ball((0.5, 0.5), 0.4);
    let r = monotone_restriction(&q, &disc).unwrap();
    for p in r.plaques() {
        let row = s.col_row(p.cells()[0]).1;
        let chord: Vec<usize> = disc.iter().filter(|&c| s.col_row(c).1 == row).collect();
        assert_eq!(p.cells(), &chord[..]);
    }
    let outside = CellSet::new(GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 16).unwrap(), [0]).unwrap();
    assert!(monotone_restriction(&q, &outside).is_err());
}

#[test]
fn restriction_composes() {
    let (d, q) = square(24);
    let s = *d.cells().space();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let y = CellSet::from_predicate(s, |_| rng.gen_bool(0.8));
        let z = CellSet::new(s, y.iter().filter(|_| rng.gen_bool(0.7)).collect::<Vec<_>>()).unwrap();
        let twice = monotone_restriction(&monotone_restriction(&q, &y).unwrap(), &z).unwrap();
        assert_eq!(twice, monotone_restriction(&q, &z).unwrap());
    }
}

#[test]
fn quotient_graph_shapes() {
    let (d, q) = square(16);
    let g = quotient_graph(&q);
    assert!(g.is_path());
    assert_eq!(g.nodes, 16);
    let one = LabelField::from_keys(d.cells(), |_| 0);
    let g1 = quotient_graph(&one);
    assert_eq!((g1.nodes, g1.edges.len()), (1, 0));
    let s = *d.cells().space();
    let qmin = singletons(d.cells());
    let gm = quotient_graph(&qmin);
    let cell_edges: usize = d.cells().iter().map(|c| s.neighbors8(c).len()).sum::<usize>() / 2;
    assert_eq!(gm.edges.len(), cell_edges);
    for (a, b) in &gm.edges {
        let (ca, cb) = (qmin.plaque(*a).cells()[0], qmin.plaque(*b).cells()[0]);
        assert!(s.neighbors8(ca).contains(&cb));
    }
    assert!(g.boundary_contact.iter().all(|&b| b));
}

#[test]
fn annulus_quotient_has_a_cycle() {
    let q = annulus_radial(64, 24).unwrap();
    let v = is_dendrite_quotient(&q).unwrap();
    assert!(!v.is_dendrite);
    let cyc = v.cycle.unwrap();
    assert!(cyc.len() >= 3);
    let adj = q.adjacency();
    for i in 0..cyc.len() {
        let (a, b) = (cyc[i], cyc[(i + 1) % cyc.len()]);
        assert!(adj[a].contains(&b), "{a} {b}");
    }
    let t = is_dendrite_quotient(&square(16).1).unwrap();
    assert!(t.is_dendrite && t.is_arc);
}

#[test]
fn dendrite_test_needs_connected_domain() {
    let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 16).unwrap();
    let two = CellSet::new(s, [0, 9]).unwrap();
    assert!(is_dendrite_quotient(&singletons(&two)).is_err());
}

#[test]
fn cw_decomposition_checks() {
    let (d, q) = square(32);
    assert!(is_cw_decomposition(&q, &d).unwrap().ok);
    let (d2, q2) = interior_block(32).unwrap();
    let v = is_cw_decomposition(&q2, &d2).unwrap();
    assert!(!v.ok);
    assert!(v.diagnostics.iter().any(|m| m.contains("misses boundary")));
    assert!(v.diagnostics.iter().any(|m| m.contains("interior")));
    let bare = DiscDomain::with_boundary(d.cells().clone(), CellSet::empty(*d.cells().space())).unwrap();
    assert!(is_cw_decomposition(&q, &bare).is_err());
}

#[test]
fn classification_and_h_shape() {
    let (_, q) = square(16);
    assert_eq!(classify_quotient_point(&q, 0).unwrap(), PointClass::End);
    assert_eq!(classify_quotient_point(&q, 5).unwrap(), PointClass::Regular);
    let h = h_shape(32).unwrap();
    let g = quotient_graph(&h.field);
    assert_eq!(g.nodes, 7);
    assert!(g.is_tree());
    let ram: Vec<usize> = (0..7)
        .filter(|&v| classify_quotient_point(&h.field, v).unwrap() == PointClass::Ramification(3))
        .collect();
    let mut want = vec![h.left_junction, h.right_junction];
    want.sort();
    assert_eq!(ram, want);
    let annulus = annulus_radial(48, 16).unwrap();
    assert!(classify_quotient_point(&annulus, 0).is_err());
}

#[test]
fn separation() {
    let st = star(48).unwrap();
    assert_eq!(quotient_graph(&st.field).nodes, 4);
    assert_eq!(separating_plaque(&st.field, st.tips).unwrap(), Separation::Found(st.center));
    let (_, q) = square(16);
    match separating_plaque(&q, [2, 5, 9]).unwrap() {
        Separation::NotFound(msg) => assert!(msg.contains("middle one separates")),
        other => panic!("{other:?}"),
    }
    assert!(separating_plaque(&q, [2, 2, 9]).is_err());
    let h = h_shape(32).unwrap();
    assert_eq!(
        separating_plaque(&h.field, [h.left_top, h.left_bottom, h.right_top]).unwrap(),
        Separation::Found(h.left_junction)
    );
}

#[test]
fn horizontal_foliation_is_continuous() {
    let gen = |res: u32| -> Result<LabelField> { Ok(horizontal(unit_square(res)?.cells())) };
    let rep = semicontinuity_profile(&gen, (0.5, 0.5), &[32, 64]).unwrap();
    for l in &rep.levels {
        assert!(l.upper_defect <= l.symmetric_defect + 1e-12);
        assert!(l.symmetric_defect <= 2.0 * l.cell_size + 1e-12, "{l:?}");
        assert_eq!(l.directions.len(), 8);
    }
    assert!(rep.upper_semicontinuous());
    assert!(semicontinuity_profile(&gen, (3.0, 0.5), &[32]).is_err());
}

#[test]
fn csmooth_of_straight_fields() {
    let (_, q) = square(64);
    let h = q.space().cell_size();
    let r = csmooth_defect(&q, 200, 3).unwrap();
    assert!(r.samples > 0);
    assert!(r.defect <= 4.0 * h, "{}", r.defect);
    let (_, s) = sheared(64, 0.3).unwrap();
    let r = csmooth_defect(&s, 200, 3).unwrap();
    assert!(r.defect <= 4.0 * h, "{}", r.defect);
    let (_, fat) = interior_block(32).unwrap();
    assert!(matches!(csmooth_defect(&fat, 10, 1), Err(Error::NotDendrite { .. })));
}

#[test]
fn product_structure_of_straight_fields() {
    let (d, q) = square(32);
    let ps = product_structure(&q, &d, &ProductOptions::default()).unwrap().unwrap();
    assert!(ps.injective);
    assert!(ps.horizontality_error_cells <= 2.0);
    // the transversal coordinate is monotone in the row
    let s = *d.cells().space();
    let t = |c: usize| ps.coords[c].unwrap().0;
    let col: Vec<f64> = (0..32).map(|j| t(s.index(7, j))).collect();
    assert!(col.windows(2).all(|w| w[0] != w[1]));
    let (d2, q2) = sheared(48, 0.3).unwrap();
    let ps = product_structure(&q2, &d2, &ProductOptions::default()).unwrap();
    let ps = ps.unwrap_or_else(|e| panic!("{e:?}"));
    assert!(ps.injective);
    assert!(ps.horizontality_error_cells <= 2.0);
    for c in d2.cells().iter() {
        let (a, b) = ps.coords[c].unwrap();
        assert!((0.0..=1.0).contains(&a) && (0.0..=1.0 + 1e-12).contains(&b));
    }
}

#[test]
fn product_structure_reports_hypotheses() {
    let d = unit_square(32).unwrap();
    let v = vertical(d.cells());
    let annulus = annulus_radial(32, 12).unwrap();
    let _ = annulus;
    // vertical plaques touch the boundary but two of them lie in it; rows do too
    let ok = product_structure(&v, &d, &ProductOptions::default()).unwrap();
    assert!(ok.is_ok());
    let (d2, q2) = interior_block(32).unwrap();
    let diags = product_structure(&q2, &d2, &ProductOptions::default()).unwrap().unwrap_err();
    assert!(diags.iter().any(|x| matches!(x, ProductDiagnostic::NotCwDecomposition(_))));
    assert!(diags.iter().any(|x| matches!(x, ProductDiagnostic::QuotientNotArc)));
}

#[test]
fn pair_coordinates() {
    let (d, q) = square(16);
    let v = vertical(d.cells());
    let pc = pair_product_structure(&q, &v, &d).unwrap().unwrap();
    let s = *d.cells().space();
    let mut seen: Vec<(usize, usize)> = d.cells().iter().map(|c| pc.coords[c].unwrap()).collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), s.len());
    let (c0, c1) = (pc.coords[s.index(0, 0)].unwrap(), pc.coords[s.index(15, 15)].unwrap());
    assert_eq!((c0.0.abs_diff(c1.0), c0.1.abs_diff(c1.1)), (15, 15));
    let (dd, hq, dq) = diagonal_pair(24).unwrap();
    assert!(pair_product_structure(&hq, &dq, &dd).unwrap().is_ok());
    match pair_product_structure(&q, &q, &d).unwrap() {
        Err(PairFailure::NotSingleton { size, .. }) => assert!(size >= 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn generating_pairs() {
    let (d, q) = square(64);
    let v = vertical(d.cells());
    let s = *d.cells().space();
    let x = s.cell_at((0.5, 0.5)).unwrap();
    let r = generating_pair_test(&q, &v, x, 0.2).unwrap();
    assert!(r.delta >= 0.1 && r.witness.is_none(), "{r:?}");
    assert!(generating_pair_test(&q, &v, s.cell_at((0.05, 0.5)).unwrap(), 0.2).is_err());

    let (rows, par) = parabola_pair(64).unwrap();
    let o = rows.space().cell_at((0.0, 0.0)).unwrap();
    let r = generating_pair_test(&rows, &par, o, 0.2).unwrap();
    assert_eq!(r.delta, 0.0);
    // away from the tangency the pair generates at a positive scale
    let p = rows.space().cell_at((0.5, 0.0)).unwrap();
    assert!(generating_pair_test(&rows, &par, p, 0.2).unwrap().delta > 0.0);

    let (vert, bent) = one_sided_pair(64).unwrap();
    let r = generating_pair_test(&vert, &bent, o, 0.2).unwrap();
    assert_eq!(r.delta, 0.0);
    assert_eq!(r.witness.unwrap().1, GeneratingSide::FirstAtXMissesSecondAtY);
}

#[test]
fn boundary_contacts_of_rows() {
    let (d, q) = square(32);
    let s = *d.cells().space();
    assert_eq!(boundary_contact_components(&q, &d, s.index(5, 10)).unwrap(), 2);
    assert_eq!(boundary_contact_components(&q, &d, s.index(5, 0)).unwrap(), 1);
}
