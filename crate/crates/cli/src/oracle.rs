//! Random cross-checks of the grid kernels against the brute-force oracles.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cwlab::decomposition::{fields, monotone_restriction, LabelField};
use cwlab::geometry::{self, CellSet, GridSpace};
use cwlab::oracle;

fn random_set(rng: &mut ChaCha8Rng, space: GridSpace, max: usize) -> CellSet {
    let n = rng.gen_range(1..=max);
    CellSet::new(space, (0..n).map(|_| rng.gen_range(0..space.len()))).unwrap()
}

/// Union of a few random rectangles, anchored at cells of `within` and clipped to it.
fn random_blocks(rng: &mut ChaCha8Rng, within: &CellSet) -> CellSet {
    let s = *within.space();
    let (w, h) = (s.width(), s.height());
    let rects: Vec<(usize, usize, usize, usize)> = (0..rng.gen_range(1..4))
        .map(|_| {
            let (c, r) = s.col_row(within.cells()[rng.gen_range(0..within.len())]);
            (c, r, c + rng.gen_range(1..=w / 2), r + rng.gen_range(1..=h / 2))
        })
        .collect();
    CellSet::from_predicate(s, |cell| {
        let (c, r) = s.col_row(cell);
        within.contains(cell) && rects.iter().any(|&(c0, r0, c1, r1)| (c0..c1).contains(&c) && (r0..r1).contains(&r))
    })
}

fn report(name: &str, checked: usize, worst: f64, tol: f64) -> bool {
    let ok = worst <= tol;
    println!("{name:<12} {checked:>5} checks  max |diff| {worst:.3e}  (tol {tol:.0e})  {}", if ok { "PASS" } else { "FAIL" });
    ok
}

pub fn run_all(seed: u64, res: u32, pairs: usize) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spaces = [GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, res)?, GridSpace::torus(res)?, GridSpace::sphere(res)?];
    let mut ok = true;

    let (mut hd, mut dd, mut wd) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..pairs {
        let s = spaces[i % spaces.len()];
        let (a, b) = (random_set(&mut rng, s, 40), random_set(&mut rng, s, 40));
        hd = hd.max((geometry::hausdorff_distance(&a, &b)? - oracle::hausdorff(&a, &b)).abs());
        dd = dd.max((geometry::diameter(&a)? - oracle::diameter(&a)).abs());
        wd = wd.max((geometry::whitney_size(&a)? - oracle::whitney(&a)).abs());
    }
    ok &= report("hausdorff", pairs, hd, 0.0);
    ok &= report("diameter", pairs, dd, 0.0);
    ok &= report("whitney", pairs, wd, 1e-9);

    let disc = fields::unit_square(res)?;
    let generators: Vec<LabelField> = vec![fields::horizontal(disc.cells()), fields::vertical(disc.cells()), fields::sheared(res, 0.3)?.1];
    let mut mismatches = 0;
    let mut checked = 0;
    for q in &generators {
        for _ in 0..20 {
            let y = random_blocks(&mut rng, q.domain());
            let z = random_blocks(&mut rng, &y);
            if z.is_empty() {
                continue;
            }
            let qy = monotone_restriction(q, &y)?;
            let qz = monotone_restriction(q, &z)?;
            checked += 1;
            if oracle::plaque_sets(&qy) != oracle::restriction(q, &y) || oracle::plaque_sets(&monotone_restriction(&qy, &z)?) != oracle::plaque_sets(&qz) {
                mismatches += 1;
            }
        }
    }
    ok &= report("restriction", checked, mismatches as f64, 0.0);
    Ok(ok)
}
