//! Brute-force reference implementations. Quadratic or worse; meant for
//! small grids and for cross-checking the fast kernels.

use std::collections::BTreeSet;

use crate::decomposition::LabelField;
use crate::geometry::CellSet;

/// Hausdorff distance by the double loop over cell pairs.
pub fn hausdorff(a: &CellSet, b: &CellSet) -> f64 {
    let s = a.space();
    let dir = |p: &CellSet, q: &CellSet| p.iter().map(|x| q.iter().map(|y| s.dist2_cells(x, y)).min().unwrap_or(u64::MAX)).max().unwrap_or(0);
    (dir(a, b).max(dir(b, a)) as f64).sqrt() * s.cell_size()
}

pub fn diameter(a: &CellSet) -> f64 {
    let s = a.space();
    let m = a.iter().flat_map(|x| a.iter().map(move |y| s.dist2_cells(x, y))).max().unwrap_or(0);
    (m as f64).sqrt() * s.cell_size()
}

/// Whitney size from its definition, one distance per (cell, member) pair.
pub fn whitney(a: &CellSet) -> f64 {
    let s = a.space();
    let mut sum = 0.0;
    for x in 0..s.len() {
        let (mut lo, mut hi) = (u64::MAX, 0);
        for y in a.iter() {
            let d = s.dist2_cells(x, y);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        sum += (hi as f64).sqrt() - (lo as f64).sqrt();
    }
    sum * s.cell_size() / s.len() as f64
}

/// Plaques of the restriction of `q` to `y`: eight-connected pieces of
/// (plaque ∩ y), found with a union-find over neighbouring pairs.
pub fn restriction(q: &LabelField, y: &CellSet) -> BTreeSet<Vec<usize>> {
    let s = *y.space();
    let mut parent: Vec<usize> = (0..s.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for c in y.iter() {
        for n in s.neighbors8(c) {
            if y.contains(n) && q.label(n) == q.label(c) {
                let (a, b) = (find(&mut parent, c), find(&mut parent, n));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for c in y.iter() {
        let r = find(&mut parent, c);
        groups.entry(r).or_default().push(c);
    }
    groups.into_values().collect()
}

pub fn plaque_sets(q: &LabelField) -> BTreeSet<Vec<usize>> {
    q.plaques().iter().map(|p| p.cells().to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::fields::horizontal;
    use crate::decomposition::monotone_restriction;
    use crate::geometry::{self, GridSpace};

    #[test]
    fn agrees_with_the_kernels() {
        let s = GridSpace::rectangle(0.0, 1.0, 0.0, 1.0, 12).unwrap();
        let a = CellSet::new(s, [3, 40, 77]).unwrap();
        let b = CellSet::new(s, [5, 100]).unwrap();
        assert_eq!(hausdorff(&a, &b), geometry::hausdorff_distance(&a, &b).unwrap());
        assert_eq!(diameter(&a), geometry::diameter(&a).unwrap());
        assert!((whitney(&a) - geometry::whitney_size(&a).unwrap()).abs() < 1e-12);
        let q = horizontal(&CellSet::full(s));
        let y = CellSet::from_predicate(s, |c| s.col_row(c).0 != 5);
        assert_eq!(restriction(&q, &y), plaque_sets(&monotone_restriction(&q, &y).unwrap()));
        assert_eq!(restriction(&q, &y).len(), 24);
    }
}
