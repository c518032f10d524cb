//! Finitely atomic measures on the plane.

use serde::{Deserialize, Serialize};

/// A single weighted point mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x1: f64,
    pub x2: f64,
    pub w: f64,
}

/// A finite non-negative combination of point masses, the only measure class
/// realizable at finite rank. Construction merges duplicate locations and
/// rejects non-positive weights.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    /// Builds a measure from `(x1, x2, w)` triples. Atoms at exactly equal
    /// locations are merged by summing weights; weights must be positive.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        let mut merged: Vec<Atom> = Vec::new();
        for (x1, x2, w) in atoms {
            assert!(w > 0.0, "atom weights must be positive");
            assert!(x1.is_finite() && x2.is_finite() && w.is_finite());
            match merged.iter_mut().find(|a| a.x1 == x1 && a.x2 == x2) {
                Some(a) => a.w += w,
                None => merged.push(Atom { x1, x2, w }),
            }
        }
        merged.sort_by(|a, b| (a.x1, a.x2).partial_cmp(&(b.x1, b.x2)).unwrap());
        AtomicMeasure { atoms: merged }
    }

    pub fn empty() -> Self {
        AtomicMeasure { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    /// Drops atoms with weight below `threshold` (used to prune numerically
    /// zero spectral weights).
    pub fn pruned(&self, threshold: f64) -> Self {
        AtomicMeasure {
            atoms: self.atoms.iter().copied().filter(|a| a.w >= threshold).collect(),
        }
    }
}

/// Distance between two atomic measures under the best atom-to-atom matching:
/// the maximum over matched pairs of location/weight discrepancies. Returns
/// `f64::INFINITY` when the atom counts differ.
///
/// Exhaustive over permutations; intended for small (desk-scale) measures.
pub fn matching_distance(a: &AtomicMeasure, b: &AtomicMeasure) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    assert!(n <= 9, "matching_distance is exhaustive; too many atoms");
    let cost = |p: &Atom, q: &Atom| -> f64 {
        (p.x1 - q.x1).abs().max((p.x2 - q.x2).abs()).max((p.w - q.w).abs())
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let d = (0..n)
            .map(|i| cost(&a.atoms[i], &b.atoms[p[i]]))
            .fold(0.0f64, f64::max);
        if d < best {
            best = d;
        }
    });
    best
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}
