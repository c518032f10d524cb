//! Gram/Hankel kernels of the moment pairings, positivity certificates, and
//! the finite-rank coordinate realization of the moment kernel.
//!
//! The kernel pairing of two extended indices reads the moment at their
//! [`ExtIndex::pairing_sum`]; positivity of the resulting Hermitian matrix is
//! the necessary condition certified here. Factorizing a PSD Gram matrix as
//! `X* X` yields coordinate vectors whose pairwise products reproduce the
//! kernel — the finite-rank counterpart of the abstract Hilbert-space
//! construction.

use num_complex::Complex64;

use crate::error::MomentError;
use crate::index::{enumerate_box, BoxSpec, ExtIndex};
use crate::linalg::{herm_eigen, hermitian_residual, max_abs, CMat, CVec};
use crate::table::{ExtMomentTable, MomentTable2D};

/// Default relative tolerance for Hermitian-symmetry gates.
pub const TOL_SYM: f64 = 1e-12;
/// Default relative tolerance for the PSD margin.
pub const TOL_PSD: f64 = 1e-9;
/// Default relative eigenvalue threshold for numerical rank decisions.
pub const TOL_RANK: f64 = 1e-10;

/// Hermitian kernel matrix over an explicit index family.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub indices: Vec<ExtIndex>,
    pub mat: CMat,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn hermitian_residual(&self) -> f64 {
        hermitian_residual(&self.mat)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.mat)
    }

    /// Position of an index inside the family.
    pub fn position(&self, i: &ExtIndex) -> Option<usize> {
        self.indices.iter().position(|j| j == i)
    }
}

/// Gram matrix of the plain moment kernel over monomials of total degree
/// `<= deg`: entry = `s[m + m', n + n']`.
pub fn build_gram_2d(s: &MomentTable2D, deg: i32) -> Result<GramMatrix, MomentError> {
    let indices = monomial_family(deg);
    build_gram_for_family_2d(s, &indices)
}

fn build_gram_for_family_2d(
    s: &MomentTable2D,
    indices: &[ExtIndex],
) -> Result<GramMatrix, MomentError> {
    let n = indices.len();
    let mut mat = CMat::zeros(n, n);
    for (a, i) in indices.iter().enumerate() {
        for (b, j) in indices.iter().enumerate() {
            mat[(a, b)] = s.get(i.m + j.m, i.n + j.n)?;
        }
    }
    Ok(GramMatrix { indices: indices.to_vec(), mat })
}

/// Monomial index family of total degree `<= deg`, sorted by `(m, n)`.
pub fn monomial_family(deg: i32) -> Vec<ExtIndex> {
    let mut v = Vec::new();
    for m in 0..=deg {
        for n in 0..=(deg - m) {
            v.push(ExtIndex::monomial(m, n));
        }
    }
    v.sort();
    v
}

/// Gram matrix of the extended kernel over the full index family of
/// `sub_box`: entry(i, j) = `u[pairing_sum(i, j)]` with `i` in the first
/// (unprimed) slot.
pub fn build_gram_extended(
    u: &ExtMomentTable,
    sub_box: &BoxSpec,
) -> Result<GramMatrix, MomentError> {
    build_gram_for_family(u, &enumerate_box(sub_box))
}

/// Extended Gram over an arbitrary index family.
pub fn build_gram_for_family(
    u: &ExtMomentTable,
    family: &[ExtIndex],
) -> Result<GramMatrix, MomentError> {
    let n = family.len();
    let mut mat = CMat::zeros(n, n);
    for (a, i) in family.iter().enumerate() {
        for (b, j) in family.iter().enumerate() {
            mat[(a, b)] = u.get(&i.pairing_sum(j))?;
        }
    }
    Ok(GramMatrix { indices: family.to_vec(), mat })
}

/// Outcome of the positivity certificate.
#[derive(Clone, Copy, Debug)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eig: f64,
    pub max_eig: f64,
    pub rank: usize,
}

/// Certifies positive semidefiniteness of a Hermitian Gram matrix.
///
/// `is_psd` holds iff the minimum eigenvalue is `>= -tol_psd * (1 + max |G|)`;
/// the rank counts eigenvalues above `TOL_RANK * max_eig`.
pub fn psd_check(g: &GramMatrix, tol_psd: f64) -> Result<PsdReport, MomentError> {
    let scale = 1.0 + g.max_abs();
    let herm = g.hermitian_residual();
    if herm > TOL_SYM * scale {
        return Err(MomentError::NotHermitian { residual: herm, tol: TOL_SYM * scale });
    }
    if g.dim() == 0 {
        return Ok(PsdReport { is_psd: true, min_eig: 0.0, max_eig: 0.0, rank: 0 });
    }
    let (vals, _) = herm_eigen(&g.mat);
    let min_eig = vals[0];
    let max_eig = *vals.last().unwrap();
    let rank = vals.iter().filter(|&&v| v > TOL_RANK * max_eig.max(0.0)).count();
    Ok(PsdReport { is_psd: min_eig >= -tol_psd * scale, min_eig, max_eig, rank })
}

/// Finite-rank coordinate realization of a PSD kernel: coordinate vectors
/// `x_i` (columns of `X`) with `X* X ~ G`, so pairwise products reproduce
/// the kernel values.
#[derive(Clone, Debug)]
pub struct GnsSpace {
    pub dim: usize,
    pub indices: Vec<ExtIndex>,
    /// `dim x |indices|` coordinate matrix; column `i` represents index `i`.
    pub coords: CMat,
    /// Kept eigenvalues of the Gram matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Cached residual `max |X* X - G|`.
    pub gram_residual: f64,
}

impl GnsSpace {
    pub fn coord(&self, i: &ExtIndex) -> Option<CVec> {
        self.indices
            .iter()
            .position(|j| j == i)
            .map(|p| self.coords.column(p).into_owned())
    }

    /// Coordinates of an index outside the family, obtained by matching its
    /// pairings with every family member in the least-squares sense. Exact
    /// whenever the underlying data comes from a measure whose coordinate
    /// space is already spanned by the family.
    pub fn project_index(
        &self,
        u: &ExtMomentTable,
        i: &ExtIndex,
    ) -> Result<CVec, MomentError> {
        // Solve X* c = g with g[j] = u[pairing_sum(j, i)]. Since the rows of
        // X are orthogonal with squared norms equal to the kept eigenvalues,
        // pinv(X*) = diag(1/lambda) X.
        let g = CVec::from_iterator(
            self.indices.len(),
            self.indices
                .iter()
                .map(|j| u.get(&j.pairing_sum(i)))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter(),
        );
        let mut c = &self.coords * g;
        for (row, &lambda) in self.eigenvalues.iter().enumerate() {
            c[row] /= Complex64::new(lambda, 0.0);
        }
        Ok(c)
    }
}

/// Factorizes a PSD Gram matrix into coordinates: eigenpairs above the
/// relative threshold `tol_rank` are kept and `X = sqrt(L) V*`.
pub fn gns_construct(g: &GramMatrix, tol_rank: f64) -> Result<GnsSpace, MomentError> {
    let n = g.dim();
    if n == 0 {
        return Ok(GnsSpace {
            dim: 0,
            indices: Vec::new(),
            coords: CMat::zeros(0, 0),
            eigenvalues: Vec::new(),
            gram_residual: 0.0,
        });
    }
    let (vals, vecs) = herm_eigen(&g.mat);
    let max_eig = *vals.last().unwrap();
    let scale = 1.0 + g.max_abs();
    if vals[0] < -TOL_PSD * scale {
        return Err(MomentError::NotPsd { min_eig: vals[0] });
    }
    let kept: Vec<usize> = (0..n)
        .filter(|&i| vals[i] > tol_rank * max_eig.max(0.0))
        .rev() // descending eigenvalue order
        .collect();
    let dim = kept.len();
    let mut coords = CMat::zeros(dim, n);
    let mut eigenvalues = Vec::with_capacity(dim);
    for (row, &i) in kept.iter().enumerate() {
        let lam = vals[i];
        eigenvalues.push(lam);
        let scaled = vecs.column(i).adjoint().scale(lam.sqrt());
        coords.row_mut(row).copy_from(&scaled);
    }
    let gram_residual = max_abs(&(coords.adjoint() * &coords - &g.mat));
    Ok(GnsSpace { dim, indices: g.indices.clone(), coords, eigenvalues, gram_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::AtomicMeasure;
    use crate::table::{moments_of_measure, real_moments_of_measure};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gram_2d_of_origin_delta() {
        let mu = AtomicMeasure::new([(0.0, 0.0, 1.0)]);
        let s = real_moments_of_measure(&mu, 2);
        let g = build_gram_2d(&s, 1).unwrap();
        // family (0,0), (0,1), (1,0): only the s[0,0] corner is nonzero
        assert_eq!(g.indices.len(), 3);
        let p00 = g.position(&ExtIndex::monomial(0, 0)).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let expect = if a == p00 && b == p00 { 1.0 } else { 0.0 };
                assert!((g.mat[(a, b)] - c(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn gram_2d_of_single_atom_is_rank_one() {
        let mu = AtomicMeasure::new([(1.0, 2.0, 3.0)]);
        let s = real_moments_of_measure(&mu, 2);
        let g = build_gram_2d(&s, 1).unwrap();
        let p = |m, n| g.position(&ExtIndex::monomial(m, n)).unwrap();
        // pairings against the constant monomial: s[0,0], s[1,0], s[0,1]
        assert_eq!(g.mat[(p(0, 0), p(0, 0))], c(3.0, 0.0));
        assert_eq!(g.mat[(p(1, 0), p(0, 0))], c(3.0, 0.0));
        assert_eq!(g.mat[(p(0, 1), p(0, 0))], c(6.0, 0.0));
        assert_eq!(g.mat[(p(0, 1), p(0, 1))], c(12.0, 0.0));
        let report = psd_check(&g, TOL_PSD).unwrap();
        assert!(report.is_psd);
        assert_eq!(report.rank, 1);
    }

    #[test]
    fn empty_measure_gram_is_zero() {
        let s = real_moments_of_measure(&AtomicMeasure::empty(), 4);
        let g = build_gram_2d(&s, 2).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        let report = psd_check(&g, TOL_PSD).unwrap();
        assert!(report.is_psd);
        assert_eq!(report.rank, 0);
    }

    #[test]
    fn extended_gram_pairing_swaps_second_slot() {
        let mu = AtomicMeasure::new([(0.0, 0.0, 1.0)]);
        let u = moments_of_measure(&mu, &BoxSpec::new(0, 0, 2));
        let family = [ExtIndex::zero(), ExtIndex::new(0, 1, 0, 0, 0, 0)];
        let g = build_gram_for_family(&u, &family).unwrap();
        // off-diagonal: pairing of (0,1,0;...) with (0,0,0;...) reads u[0,1,0;...] = i
        assert!((g.mat[(1, 0)] - c(0.0, 1.0)).norm() < 1e-14);
        // diagonal: pairing of (0,1,0;...) with itself reads u[0,1,1;...] = i*(-i) = 1
        assert!((g.mat[(1, 1)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(g.hermitian_residual() <= 1e-12);
    }

    #[test]
    fn indefinite_matrix_fails_psd() {
        let g = GramMatrix {
            indices: vec![ExtIndex::zero(), ExtIndex::monomial(1, 0)],
            mat: CMat::from_row_slice(
                2,
                2,
                &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            ),
        };
        let report = psd_check(&g, TOL_PSD).unwrap();
        assert!(!report.is_psd);
        assert!((report.min_eig + 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_is_psd_rank_two() {
        let g = GramMatrix {
            indices: vec![ExtIndex::zero(), ExtIndex::monomial(1, 0)],
            mat: CMat::identity(2, 2),
        };
        let report = psd_check(&g, TOL_PSD).unwrap();
        assert!(report.is_psd);
        assert_eq!(report.rank, 2);
    }

    #[test]
    fn gns_of_scalar_one() {
        let g = GramMatrix { indices: vec![ExtIndex::zero()], mat: CMat::identity(1, 1) };
        let gns = gns_construct(&g, TOL_RANK).unwrap();
        assert_eq!(gns.dim, 1);
        assert!((gns.coords[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gns_rank_matches_atom_count() {
        let mu = AtomicMeasure::new([(0.0, 0.0, 1.0), (1.0, 1.0, 1.0)]);
        let s = real_moments_of_measure(&mu, 2);
        let g = build_gram_2d(&s, 1).unwrap();
        let gns = gns_construct(&g, TOL_RANK).unwrap();
        assert_eq!(gns.dim, 2);
        assert!(gns.gram_residual <= 1e-10 * (1.0 + g.max_abs()));
    }

    #[test]
    fn projected_coords_reproduce_pairings() {
        let mu = AtomicMeasure::new([(0.5, -1.0, 1.0), (2.0, 0.5, 0.5)]);
        let u = moments_of_measure(&mu, &BoxSpec::new(4, 4, 2));
        let family = monomial_family(1);
        let g = build_gram_for_family(&u, &family).unwrap();
        let gns = gns_construct(&g, TOL_RANK).unwrap();
        let extra = ExtIndex::new(1, 1, 0, 0, 0, -1);
        let cvec = gns.project_index(&u, &extra).unwrap();
        for (p, j) in family.iter().enumerate() {
            let got = gns.coords.column(p).adjoint() * &cvec;
            let want = u.get(&j.pairing_sum(&extra)).unwrap();
            assert!((got[(0, 0)] - want).norm() < 1e-9 * (1.0 + u.max_abs()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn oracle_extended_grams_are_psd_with_gns_fidelity(
            atoms in proptest::collection::vec(
                (-3.0..3.0f64, -3.0..3.0f64, 0.01..2.0f64), 1..6),
        ) {
            let mu = AtomicMeasure::new(atoms);
            let u = moments_of_measure(&mu, &BoxSpec::new(4, 4, 2));
            let g = build_gram_extended(&u, &BoxSpec::new(1, 1, 1)).unwrap();
            let scale = 1.0 + g.max_abs();
            let report = psd_check(&g, TOL_PSD).unwrap();
            prop_assert!(report.min_eig >= -1e-9 * scale);
            let gns = gns_construct(&g, TOL_RANK).unwrap();
            prop_assert!(gns.gram_residual <= 1e-9 * scale);
        }
    }
}
