//! Small library of label fields used by tests, the acceptance suite and the CLI.

use std::f64::consts::PI;

use super::{DiscDomain, LabelField};
use crate::error::Result;
use crate::geometry::{CellSet, GridSpace};

pub fn unit_square(res: u32) -> Result<DiscDomain> {
    let space = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, res)?;
    DiscDomain::new(CellSet::full(space))
}

pub fn horizontal(domain: &CellSet) -> LabelField {
    let space = *domain.space();
    LabelField::from_keys(domain, |c| space.col_row(c).1)
}

pub fn vertical(domain: &CellSet) -> LabelField {
    let space = *domain.space();
    LabelField::from_keys(domain, |c| space.col_row(c).0)
}

/// The finest decomposition: every cell its own plaque.
pub fn singletons(domain: &CellSet) -> LabelField {
    LabelField::from_keys(domain, |c| c)
}

/// Plaques along `y = c + slope·x` on the parallelogram they sweep.
/// Each plaque is a standard (four-connected) digital line, so plaques two
/// apart never touch. The top and bottom plaques are marked as boundary.
pub fn sheared(res: u32, slope: f64) -> Result<(DiscDomain, LabelField)> {
    if !(0.0..=1.0).contains(&slope) {
        return Err(crate::Error::Precondition("slope must lie in [0, 1]".into()));
    }
    let space = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0 + 2.0 * slope, res)?;
    let n = res as i64;
    // exact integer arithmetic on a slope quantized to 1/1000
    let a = (slope * 1000.0).round() as i64;
    let key = move |c: usize| {
        let (i, j) = space.col_row(c);
        (1000 * j as i64 - a * i as i64).div_euclid(1000 + a)
    };
    let cells = CellSet::from_predicate(space, |c| (0..n).contains(&key(c)));
    let field = LabelField::from_keys(&cells, key);
    let ends = CellSet::from_predicate(space, |c| cells.contains(c) && (key(c) == 0 || key(c) == n - 1));
    let boundary = super::inner_boundary(&cells).union(&ends)?;
    let disc = DiscDomain::with_boundary(cells, boundary)?;
    Ok((disc, field))
}

/// Horizontal and slope-one diagonal plaques on the parallelogram they bound.
pub fn diagonal_pair(res: u32) -> Result<(DiscDomain, LabelField, LabelField)> {
    let space = GridSpace::rectangle(0.0, 2.0, 0.0, 1.0, res)?;
    let n = res as i64;
    let cells = CellSet::from_predicate(space, |c| {
        let (i, j) = space.col_row(c);
        (0..n).contains(&(i as i64 - j as i64))
    });
    let disc = DiscDomain::new(cells)?;
    let h = horizontal(disc.cells());
    let d = LabelField::from_keys(disc.cells(), |c| {
        let (i, j) = space.col_row(c);
        i as i64 - j as i64
    });
    Ok((disc, h, d))
}

/// Radial wedges of the annulus `0.4 ≤ |p| ≤ 0.9`.
pub fn annulus_radial(res: u32, wedges: usize) -> Result<LabelField> {
    let space = GridSpace::rectangle(-1.0, 1.0, -1.0, 1.0, res)?;
    let cells = CellSet::from_predicate(space, |c| {
        let (x, y) = space.center(c);
        (0.4..=0.9).contains(&x.hypot(y))
    });
    Ok(LabelField::from_keys(&cells, |c| {
        let (x, y) = space.center(c);
        let t = (y.atan2(x) + PI) / (2.0 * PI);
        ((t * wedges as f64) as usize).min(wedges - 1)
    }))
}

/// Horizontal rows of the unit square with a solid 5×5 plaque in the middle.
pub fn interior_block(res: u32) -> Result<(DiscDomain, LabelField)> {
    let disc = unit_square(res)?;
    let space = *disc.cells().space();
    let m = res as usize / 2;
    let field = LabelField::from_keys(disc.cells(), |c| {
        let (i, j) = space.col_row(c);
        if (m - 2..=m + 2).contains(&i) && (m - 2..=m + 2).contains(&j) {
            usize::MAX
        } else {
            j
        }
    });
    Ok((disc, field))
}

/// A three-branch star: a T-shaped center plaque with three surrounding regions.
pub struct Star {
    pub field: LabelField,
    pub center: usize,
    pub tips: [usize; 3],
}

pub fn star(res: u32) -> Result<Star> {
    let disc = unit_square(res)?;
    let space = *disc.cells().space();
    let n = res as usize;
    let (rc, cc) = (n / 3, n / 2);
    let region = move |c: usize| {
        let (i, j) = space.col_row(c);
        if j == rc || (j > rc && (cc - 1..=cc).contains(&i)) {
            0
        } else if j < rc {
            1
        } else if i < cc {
            2
        } else {
            3
        }
    };
    let field = LabelField::from_keys(disc.cells(), region);
    let at = |i: usize, j: usize| field.label(space.index(i, j)).unwrap();
    let tips = [at(0, 0), at(0, n - 1), at(n - 1, n - 1)];
    let center = at(0, rc);
    Ok(Star { field, center, tips })
}

/// Quotient shaped like the letter H: two 3-way junction plaques joined by a bridge.
pub struct HShape {
    pub field: LabelField,
    pub left_top: usize,
    pub left_bottom: usize,
    pub right_top: usize,
    pub right_bottom: usize,
    pub left_junction: usize,
    pub right_junction: usize,
    pub bridge: usize,
}

pub fn h_shape(res: u32) -> Result<HShape> {
    let space = GridSpace::rectangle(0.0, 2.0, 0.0, 1.0, res)?;
    let (w, n) = (space.width(), space.height());
    let a = n / 4;
    let mid = n / 2;
    let region = move |c: usize| {
        let (i, j) = space.col_row(c);
        let on_mid = j == mid - 1 || j == mid;
        if (a..a + 3).contains(&i) || (i < a && on_mid) {
            "J1"
        } else if (w - a - 3..w - a).contains(&i) || (i >= w - a && on_mid) {
            "J2"
        } else if i < a {
            if j > mid { "LT" } else { "LB" }
        } else if i >= w - a {
            if j > mid { "RT" } else { "RB" }
        } else {
            "B"
        }
    };
    let field = LabelField::from_keys(&CellSet::full(space), region);
    let at = |i: usize, j: usize| field.label(space.index(i, j)).unwrap();
    Ok(HShape {
        left_top: at(0, n - 1),
        left_bottom: at(0, 0),
        right_top: at(w - 1, n - 1),
        right_bottom: at(w - 1, 0),
        left_junction: at(a, 0),
        right_junction: at(w - a - 1, 0),
        bridge: at(w / 2, 0),
        field,
    })
}

/// Horizontal rows and parabolas `y = x² + c` on `[-1,1]²`, with a cell centered at the origin.
pub fn parabola_pair(res: u32) -> Result<(LabelField, LabelField)> {
    let space = GridSpace::vertex_centered(-1.0, 1.0, -1.0, 1.0, res)?;
    let all = CellSet::full(space);
    let h = space.cell_size();
    let rows = horizontal(&all);
    let parabolas = LabelField::from_keys(&all, |c| {
        let (x, y) = space.center(c);
        ((y - x * x) / h).round() as i64
    });
    Ok((rows, parabolas))
}

/// Vertical lines against a field whose plaques are Λ-shaped below the origin
/// and vertical rays above. The Λ through the origin crosses every nearby
/// vertical, but the rays just beside the origin miss the vertical through it.
pub fn one_sided_pair(res: u32) -> Result<(LabelField, LabelField)> {
    let space = GridSpace::vertex_centered(-1.0, 1.0, -1.0, 1.0, res)?;
    let all = CellSet::full(space);
    let origin = space.cell_at((0.0, 0.0)).expect("origin is a cell center");
    let (c0, r0) = space.col_row(origin);
    let bent = LabelField::from_keys(&all, |c| {
        let (i, j) = space.col_row(c);
        let (di, dj) = (i as i64 - c0 as i64, j as i64 - r0 as i64);
        if dj <= -di.abs() {
            (0, dj + di.abs())
        } else {
            (1, di)
        }
    });
    Ok((vertical(&all), bent))
}
