//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Largest entry magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Largest deviation from Hermitian symmetry.
pub fn hermitian_residual(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `(m + m*) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending with
/// matching eigenvector columns.
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let se = nalgebra::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigendecomposition of the Hermitian dilation `[[0, m], [m*, 0]]`, whose
/// positive eigenvalues are the singular values of `m` and whose
/// eigenvectors stack the left and right singular vectors. This route keeps
/// full singular-value resolution (no normal-matrix squaring) and, unlike
/// the bidiagonal SVD, stays accurate on rank-deficient complex matrices.
fn dilation_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let (nr, nc) = (m.nrows(), m.ncols());
    let n = nr + nc;
    let mut h = CMat::zeros(n, n);
    h.view_mut((0, nr), (nr, nc)).copy_from(m);
    h.view_mut((nr, 0), (nc, nr)).copy_from(&m.adjoint());
    herm_eigen(&h)
}

/// Moore-Penrose pseudoinverse with a relative singular-value cutoff.
pub fn pinv(m: &CMat, rel_tol: f64) -> CMat {
    let (nr, nc) = (m.nrows(), m.ncols());
    if nr == 0 || nc == 0 {
        return CMat::zeros(nc, nr);
    }
    let (vals, vecs) = dilation_eigen(m);
    let smax = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cut = rel_tol * smax.max(1e-300);
    // Each kept eigenpair (s, (u, v)/sqrt(2)) contributes v s^{-1} u* with
    // unit u, v; the 1/2 normalization of the stacked vector gives factor 2.
    let mut out = CMat::zeros(nc, nr);
    for (i, &s) in vals.iter().enumerate() {
        if s > cut {
            let w = vecs.column(i);
            let u = w.rows(0, nr).into_owned();
            let v = w.rows(nr, nc).into_owned();
            out += v * u.adjoint() * Complex64::new(2.0 / s, 0.0);
        }
    }
    out
}

/// Numerical rank with a relative singular-value cutoff.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let (vals, _) = dilation_eigen(m);
    let smax = vals.last().copied().unwrap_or(0.0).max(0.0);
    vals.iter().filter(|&&s| s > rel_tol * smax.max(1e-300)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn herm_eigen_recovers_matrix() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)],
        );
        let (vals, vecs) = herm_eigen(&m);
        let lambda = CMat::from_diagonal(&CVec::from_iterator(
            2,
            vals.iter().map(|&v| c(v, 0.0)),
        ));
        let rebuilt = &vecs * lambda * vecs.adjoint();
        assert!(max_abs(&(&rebuilt - &m)) < 1e-12);
        assert!(vals[0] <= vals[1]);
    }

    #[test]
    fn pinv_of_tall_matrix() {
        let m = CMat::from_row_slice(3, 2, &[
            c(1.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(2.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0),
        ]);
        let p = pinv(&m, 1e-12);
        let id = &p * &m;
        assert!(max_abs(&(&id - &CMat::identity(2, 2))) < 1e-12);
    }
}
