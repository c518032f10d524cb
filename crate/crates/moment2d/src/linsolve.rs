//! Parametric Gaussian elimination: solve finite complex linear systems with
//! free variables, returning an explicit affine parametrization of the
//! solution set together with solvability conditions.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::MomentError;
use crate::linalg::{max_abs, max_abs_vec, pinv, CMat, CVec};

/// Default relative pivot tolerance.
pub const TOL_PIVOT: f64 = 1e-10;

/// Affine parametrization `{ particular + span(null_basis) }` of the solution
/// set of `A x = f`, with solvability conditions from eliminated zero rows.
#[derive(Clone, Debug)]
pub struct AffineSet {
    pub n_vars: usize,
    /// Pivot columns in increasing order.
    pub pivot_cols: Vec<usize>,
    /// The solution with all free variables set to 0.
    pub particular: CVec,
    /// One null-space vector per free (non-pivot) column, in column order;
    /// the vector for free column `c` has a 1 in slot `c`.
    pub null_basis: Vec<CVec>,
    /// Magnitudes of the right-hand-side entries left on zero rows; all must
    /// vanish (within tolerance) for the system to be solvable.
    pub consistency_residuals: Vec<f64>,
}

impl AffineSet {
    /// Free (non-pivot) columns in increasing order.
    pub fn free_cols(&self) -> Vec<usize> {
        (0..self.n_vars).filter(|c| !self.pivot_cols.contains(c)).collect()
    }

    pub fn max_consistency_residual(&self) -> f64 {
        self.consistency_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_consistent(&self, tol_res: f64) -> bool {
        self.max_consistency_residual() <= tol_res
    }

    /// Orthogonal projector onto the span of the null basis. Basis lists are
    /// non-unique, so solution sets are compared through this projector.
    pub fn null_projector(&self) -> CMat {
        if self.null_basis.is_empty() {
            return CMat::zeros(self.n_vars, self.n_vars);
        }
        let mut nmat = CMat::zeros(self.n_vars, self.null_basis.len());
        for (c, v) in self.null_basis.iter().enumerate() {
            nmat.set_column(c, v);
        }
        // N (N* N)^+ N*
        let gram = nmat.adjoint() * &nmat;
        &nmat * pinv(&gram, TOL_PIVOT) * nmat.adjoint()
    }
}

/// Frobenius distance between the null-space projectors of two affine sets —
/// zero iff the homogeneous solution spaces coincide.
pub fn projector_distance(a: &AffineSet, b: &AffineSet) -> f64 {
    assert_eq!(a.n_vars, b.n_vars);
    (a.null_projector() - b.null_projector()).norm()
}

/// Gauss-Jordan elimination of `A x = f` with partial pivoting by magnitude.
///
/// A column is treated as zero (free variable) when its largest remaining
/// magnitude is `<= tol_pivot * (1 + max |A|)`. Inconsistency is reported as
/// data in `consistency_residuals`, never as an error.
pub fn parametric_gauss(a: &CMat, f: &CVec, tol_pivot: f64) -> AffineSet {
    let rows = a.nrows();
    let n_vars = a.ncols();
    assert_eq!(f.len(), rows, "right-hand side length must match row count");
    let threshold = tol_pivot * (1.0 + max_abs(a));

    // Augmented matrix [A | f], reduced in place to RREF.
    let mut aug = CMat::zeros(rows, n_vars + 1);
    aug.view_mut((0, 0), (rows, n_vars)).copy_from(a);
    aug.set_column(n_vars, f);

    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..n_vars {
        if row == rows {
            break;
        }
        let (best_row, best_mag) = (row..rows)
            .map(|r| (r, aug[(r, col)].norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if best_mag <= threshold {
            continue; // free column
        }
        aug.swap_rows(row, best_row);
        let inv = Complex64::new(1.0, 0.0) / aug[(row, col)];
        for c in col..=n_vars {
            aug[(row, c)] *= inv;
        }
        for r in 0..rows {
            if r == row {
                continue;
            }
            let factor = aug[(r, col)];
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col..=n_vars {
                let sub = factor * aug[(row, c)];
                aug[(r, c)] -= sub;
            }
        }
        pivot_cols.push(col);
        row += 1;
    }

    let consistency_residuals: Vec<f64> =
        (row..rows).map(|r| aug[(r, n_vars)].norm()).collect();

    let mut particular = CVec::zeros(n_vars);
    for (i, &c) in pivot_cols.iter().enumerate() {
        particular[c] = aug[(i, n_vars)];
    }

    let mut null_basis = Vec::new();
    for free in 0..n_vars {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = CVec::zeros(n_vars);
        v[free] = Complex64::new(1.0, 0.0);
        for (i, &c) in pivot_cols.iter().enumerate() {
            v[c] = -aug[(i, free)];
        }
        null_basis.push(v);
    }

    AffineSet { n_vars, pivot_cols, particular, null_basis, consistency_residuals }
}

/// Point of the affine set with the given free-variable assignment; unassigned
/// free columns default to 0. Fails if the set is inconsistent.
pub fn affine_sample(
    set: &AffineSet,
    assignment: &BTreeMap<usize, Complex64>,
    tol_res: f64,
) -> Result<CVec, MomentError> {
    if !set.is_consistent(tol_res) {
        return Err(MomentError::Inconsistent {
            residual: set.max_consistency_residual(),
        });
    }
    let mut x = set.particular.clone();
    let free = set.free_cols();
    for (v, &c) in set.null_basis.iter().zip(free.iter()) {
        if let Some(&a) = assignment.get(&c) {
            x += v * a;
        }
    }
    Ok(x)
}

/// Solves the vertical concatenation of several systems over a shared variable
/// layout — the intersection of their solution sets.
pub fn stacked_solve(systems: &[(CMat, CVec)], tol_pivot: f64) -> AffineSet {
    assert!(!systems.is_empty());
    let n_vars = systems[0].0.ncols();
    let rows: usize = systems.iter().map(|(a, _)| a.nrows()).sum();
    let mut amat = CMat::zeros(rows, n_vars);
    let mut f = CVec::zeros(rows);
    let mut at = 0;
    for (a, b) in systems {
        assert_eq!(a.ncols(), n_vars, "systems must share a variable layout");
        amat.view_mut((at, 0), (a.nrows(), n_vars)).copy_from(a);
        f.rows_mut(at, a.nrows()).copy_from(b);
        at += a.nrows();
    }
    parametric_gauss(&amat, &f, tol_pivot)
}

/// Largest entry of `A x - f`.
pub fn residual(a: &CMat, x: &CVec, f: &CVec) -> f64 {
    max_abs_vec(&(a * x - f))
}
