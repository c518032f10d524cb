//! The extended two-dimensional moment problem at finite rank: recurrence
//! verification, commuting self-adjoint operator pair with Cayley unitaries,
//! joint spectral decomposition into an atomic measure, and the torus
//! transform used for uniqueness spot-checks.
//!
//! Sign convention. The coordinate realization satisfies `X* X = G` with
//! `G[a][b] = u[pairing_sum(a, b)]`, which identifies the column of index `a`
//! with the *conjugate* of the integrand `f_a`. Multiplication by the real
//! variables is unaffected, but multiplication by `(x1 + i)` acts on
//! conjugates as `(A - iI)`; the shift and factorization identities below
//! therefore carry the opposite `±i` relative to the integrand-side reading.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::MomentError;
use crate::gram::{
    build_gram_for_family, gns_construct, psd_check, GnsSpace, PsdReport, TOL_PSD,
    TOL_RANK,
};
use crate::index::{enumerate_box, BoxSpec, ExtIndex, Slot};
use crate::linalg::{
    herm_eigen, hermitian_residual, hermitize, max_abs, max_abs_vec, pinv, rank, CMat,
    CVec,
};
use crate::measure::AtomicMeasure;
use crate::table::{moment_of_measure_at, ExtMomentTable};

/// Relative operator-identity tolerance.
pub const TOL_OP: f64 = 1e-7;
/// Relative spectral-weight pruning threshold.
pub const TOL_WEIGHT: f64 = 1e-10;
/// Relative tolerance for the final reconstruction gate.
pub const TOL_RECON: f64 = 1e-6;
/// Relative tolerance for the recurrence gate inside the solve pipeline.
pub const TOL_RECUR: f64 = 1e-7;
/// Relative tolerance for the conjugation-symmetry gate inside the pipeline.
pub const TOL_CONJ: f64 = 1e-9;

/// The commuting self-adjoint pair acting on the coordinate space, with the
/// cyclic vector representing the constant integrand.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub a: CMat,
    pub b: CMat,
    pub cyclic: CVec,
    pub sym_residual: f64,
    pub comm_residual: f64,
}

impl OperatorPair {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn op_scale(&self) -> f64 {
        1.0 + max_abs(&self.a).max(max_abs(&self.b))
    }
}

/// Cayley transforms of the pair: unitaries whose commutation certifies
/// strong commutation of the self-adjoint operators.
#[derive(Clone, Debug)]
pub struct CayleyPair {
    pub ua: CMat,
    pub ub: CMat,
    pub unitarity_residual: f64,
    pub comm_residual: f64,
}

/// Result of checking the pointwise shift recurrences of the table.
#[derive(Clone, Debug)]
pub struct RecurrenceReport {
    pub max_residual: f64,
    /// Indices at which some identity exceeded the tolerance, with residuals.
    pub violations: Vec<(ExtIndex, f64)>,
    /// Number of identity instances actually evaluated.
    pub checked: usize,
}

/// Checks the table-level shift identities
/// `u[m+1, ...] + i u = u[k+1, ...]`, `u[m+1, ...] - i u = u[l+1, ...]`
/// and the `(n, r, t)` analogues, at every index where all three entries are
/// present. Violations above `tol` are reported per index.
pub fn check_recurrences(u: &ExtMomentTable, tol: f64) -> RecurrenceReport {
    let i_unit = Complex64::new(0.0, 1.0);
    let mut max_residual = 0.0f64;
    let mut violations = Vec::new();
    let mut checked = 0usize;
    let cases = [
        (Slot::M, Slot::K, i_unit),
        (Slot::M, Slot::L, -i_unit),
        (Slot::N, Slot::R, i_unit),
        (Slot::N, Slot::T, -i_unit),
    ];
    for (idx, &v) in &u.entries {
        let mut worst_here = 0.0f64;
        for &(mono, res, sign) in &cases {
            let up = idx.shift(mono, 1).and_then(|s| u.entries.get(&s));
            let side = idx.shift(res, 1).and_then(|s| u.entries.get(&s));
            if let (Some(&up), Some(&side)) = (up, side) {
                checked += 1;
                worst_here = worst_here.max((up + sign * v - side).norm());
            }
        }
        max_residual = max_residual.max(worst_here);
        if worst_here > tol {
            violations.push((*idx, worst_here));
        }
    }
    RecurrenceReport { max_residual, violations, checked }
}

/// Index family used by the solver: monomials `m <= p`, `n <= q` combined
/// with one resolvent factor per variable when the box admits it. The bounds
/// are chosen so that every pairing sum — including pairings against
/// variable-shifted family indices — stays inside the data box.
pub fn default_solve_family(b: &BoxSpec) -> Vec<ExtIndex> {
    let p = (b.m_max - 1).max(0) / 2;
    let q = (b.n_max - 1).max(0) / 2;
    let ks: &[i32] = if b.k_abs_max >= 1 { &[-1, 0] } else { &[0] };
    let mut family = Vec::new();
    for m in 0..=p {
        for n in 0..=q {
            for &k in ks {
                for &r in ks {
                    family.push(ExtIndex::new(m, k, 0, n, r, 0));
                }
            }
        }
    }
    family.sort();
    family
}

/// Builds the multiplication operators `A` (by `x1`) and `B` (by `x2`) on the
/// coordinate space: the coordinates of every variable-shifted family index
/// are expressed through the family coordinates by pseudoinverse.
pub fn build_operators(
    gns: &GnsSpace,
    u: &ExtMomentTable,
) -> Result<OperatorPair, MomentError> {
    let dim = gns.dim;
    let ncols = gns.indices.len();
    let span_rank = rank(&gns.coords, TOL_RANK);
    if span_rank < dim {
        return Err(MomentError::CoreDeficient { rank: span_rank, dim });
    }
    let core_pinv = pinv(&gns.coords, TOL_RANK);

    let shifted_coords = |slot: Slot| -> Result<CMat, MomentError> {
        let mut xs = CMat::zeros(dim, ncols);
        for (i, idx) in gns.indices.iter().enumerate() {
            let s = idx.shift(slot, 1).expect("monomial up-shift cannot go negative");
            let col = match gns.coord(&s) {
                Some(c) => c,
                None => gns.project_index(u, &s)?,
            };
            xs.set_column(i, &col);
        }
        Ok(xs)
    };

    let a = shifted_coords(Slot::M)? * &core_pinv;
    let b = shifted_coords(Slot::N)? * &core_pinv;
    let sym_residual = hermitian_residual(&a).max(hermitian_residual(&b));
    let comm_residual = max_abs(&(&a * &b - &b * &a));
    let cyclic = gns
        .coord(&ExtIndex::zero())
        .expect("the solve family must contain the constant index");

    let pair = OperatorPair { a, b, cyclic, sym_residual, comm_residual };
    let tol = TOL_OP * pair.op_scale();
    if pair.sym_residual > tol {
        return Err(MomentError::NotSymmetric { residual: pair.sym_residual });
    }
    if pair.comm_residual > tol {
        return Err(MomentError::NotCommuting { residual: pair.comm_residual });
    }
    Ok(pair)
}

/// Cayley transforms `U = (A - iI)(A + iI)^{-1}` of both operators.
pub fn cayley(p: &OperatorPair) -> Result<CayleyPair, MomentError> {
    let n = p.dim();
    if n == 0 {
        return Ok(CayleyPair {
            ua: CMat::zeros(0, 0),
            ub: CMat::zeros(0, 0),
            unitarity_residual: 0.0,
            comm_residual: 0.0,
        });
    }
    let transform = |m: &CMat| -> Result<CMat, MomentError> {
        let shift = CMat::identity(n, n).scale_complex(Complex64::new(0.0, 1.0));
        let inv = (m + &shift).try_inverse().ok_or(MomentError::SingularShift)?;
        Ok((m - &shift) * inv)
    };
    let ua = transform(&p.a)?;
    let ub = transform(&p.b)?;
    let eye = CMat::identity(n, n);
    let unitarity_residual = max_abs(&(ua.adjoint() * &ua - &eye))
        .max(max_abs(&(ub.adjoint() * &ub - &eye)));
    let comm_residual = max_abs(&(&ua * &ub - &ub * &ua));
    Ok(CayleyPair { ua, ub, unitarity_residual, comm_residual })
}

trait ScaleComplex {
    fn scale_complex(self, c: Complex64) -> CMat;
}

impl ScaleComplex for CMat {
    fn scale_complex(self, c: Complex64) -> CMat {
        self * c
    }
}

/// Simultaneously diagonalizes the pair and reads off the atomic measure:
/// atom locations are the paired eigenvalues and weights are the squared
/// overlaps of the eigenvectors with the cyclic vector.
pub fn joint_spectral_measure(p: &OperatorPair) -> Result<AtomicMeasure, MomentError> {
    let n = p.dim();
    if n == 0 {
        return Ok(AtomicMeasure::empty());
    }
    let scale = p.op_scale();
    let tol_diag = TOL_OP * scale;

    // A deterministic pseudo-random rotation angle keeps generic eigenvalues
    // of cos(t) A + sin(t) B simple even when A or B alone is degenerate.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f_6d32);
    let theta: f64 = rng.random_range(0.2..std::f64::consts::PI - 0.2);
    let h = hermitize(&(p.a.clone() * Complex64::new(theta.cos(), 0.0)
        + p.b.clone() * Complex64::new(theta.sin(), 0.0)));
    let (_, mut basis) = herm_eigen(&h);

    if joint_offdiag_residual(&basis, p) > tol_diag {
        basis = refine_joint_basis(p, 1e-6 * scale);
        let residual = joint_offdiag_residual(&basis, p);
        if residual > tol_diag {
            return Err(MomentError::DiagonalizationFailed { residual });
        }
    }

    let da = basis.adjoint() * &p.a * &basis;
    let db = basis.adjoint() * &p.b * &basis;
    let mut atoms = Vec::new();
    let mut total = 0.0f64;
    let mut raw = Vec::new();
    for i in 0..n {
        let overlap = (basis.column(i).adjoint() * &p.cyclic)[(0, 0)];
        let w = overlap.norm_sqr();
        total += w;
        raw.push((da[(i, i)].re, db[(i, i)].re, w));
    }
    if total <= TOL_WEIGHT {
        return Ok(AtomicMeasure::empty());
    }
    for (x1, x2, w) in raw {
        if w >= TOL_WEIGHT * total {
            atoms.push((x1, x2, w));
        }
    }
    Ok(AtomicMeasure::new(atoms))
}

fn joint_offdiag_residual(basis: &CMat, p: &OperatorPair) -> f64 {
    let da = basis.adjoint() * &p.a * basis;
    let db = basis.adjoint() * &p.b * basis;
    let off = |m: &CMat| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    worst = worst.max(m[(i, j)].norm());
                } else {
                    worst = worst.max(m[(i, j)].im.abs());
                }
            }
        }
        worst
    };
    off(&da).max(off(&db))
}

/// Fallback joint basis: eigenvectors of `A`, refined inside each degenerate
/// eigenspace by rediagonalizing the compression of `B`.
fn refine_joint_basis(p: &OperatorPair, cluster_tol: f64) -> CMat {
    let n = p.dim();
    let (avals, avecs) = herm_eigen(&hermitize(&p.a));
    let mut basis = avecs;
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && avals[end] - avals[end - 1] <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = basis.columns(start, end - start).into_owned();
            let compressed = hermitize(&(block.adjoint() * &p.b * &block));
            let (_, w) = herm_eigen(&compressed);
            let rotated = &block * w;
            basis.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }
    basis
}

/// Diagnostic summary of a completed (or attempted) solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub family_size: usize,
    pub psd: PsdReport,
    pub gns_dim: usize,
    pub recurrence_residual: f64,
    pub sym_residual: f64,
    pub comm_residual: f64,
    pub unitarity_residual: f64,
    pub cayley_comm_residual: f64,
    pub recon_residual: f64,
}

/// A recovered measure together with the gate diagnostics.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub measure: AtomicMeasure,
    pub report: SolveReport,
}

/// A gate failure, labeled by pipeline stage.
#[derive(Clone, Debug, thiserror::Error)]
#[error("stage {stage}: {error}")]
pub struct StageFailure {
    pub stage: &'static str,
    pub error: MomentError,
}

fn stage(stage: &'static str) -> impl Fn(MomentError) -> StageFailure {
    move |error| StageFailure { stage, error }
}

/// Full solve pipeline on an extended moment table with the default family.
pub fn solve_extended(u: &ExtMomentTable) -> Result<SolveOutcome, StageFailure> {
    solve_with_family(u, &default_solve_family(&u.box_spec))
}

/// Solve pipeline over an explicit coordinate family (the table only needs
/// the entries the family actually touches).
pub fn solve_with_family(
    u: &ExtMomentTable,
    family: &[ExtIndex],
) -> Result<SolveOutcome, StageFailure> {
    let u_scale = 1.0 + u.max_abs();

    let conj = u.conjugation_residual();
    if conj > TOL_CONJ * u_scale {
        return Err(StageFailure {
            stage: "conjugation",
            error: MomentError::ConjugationFail { residual: conj },
        });
    }

    let gram = build_gram_for_family(u, family).map_err(stage("gram"))?;
    let psd = psd_check(&gram, TOL_PSD).map_err(stage("psd"))?;
    if !psd.is_psd {
        return Err(StageFailure {
            stage: "psd",
            error: MomentError::NotPsd { min_eig: psd.min_eig },
        });
    }

    let gns = gns_construct(&gram, TOL_RANK).map_err(stage("gns"))?;

    let recur = check_recurrences(u, TOL_RECUR * u_scale);
    if !recur.violations.is_empty() {
        return Err(StageFailure {
            stage: "recurrence",
            error: MomentError::RecurrenceFail { residual: recur.max_residual },
        });
    }

    let pair = build_operators(&gns, u).map_err(stage("operators"))?;
    let cay = cayley(&pair).map_err(stage("cayley"))?;
    let measure = joint_spectral_measure(&pair).map_err(stage("spectral"))?;

    let mut recon_residual = 0.0f64;
    for (i, v) in &u.entries {
        recon_residual = recon_residual.max((moment_of_measure_at(&measure, i) - v).norm());
    }
    let report = SolveReport {
        family_size: family.len(),
        psd,
        gns_dim: gns.dim,
        recurrence_residual: recur.max_residual,
        sym_residual: pair.sym_residual,
        comm_residual: pair.comm_residual,
        unitarity_residual: cay.unitarity_residual,
        cayley_comm_residual: cay.comm_residual,
        recon_residual,
    };
    if recon_residual > TOL_RECON * u_scale {
        return Err(StageFailure {
            stage: "reconstruction",
            error: MomentError::ReconstructionFail { residual: recon_residual },
        });
    }
    Ok(SolveOutcome { measure, report })
}

/// Largest residual of the coordinate-level resolvent shift relations over
/// index pairs inside `check_box`:
/// `(A - iI) c[k-1] = c[k]`, `(A + iI) c[l-1] = c[l]`, and the `B` analogues
/// in `r`, `t`. Out-of-family coordinates are obtained by projection, so the
/// data box must contain the corresponding pairing sums.
pub fn resolvent_residual(
    gns: &GnsSpace,
    p: &OperatorPair,
    u: &ExtMomentTable,
    check_box: &BoxSpec,
) -> Result<f64, MomentError> {
    let i_unit = Complex64::new(0.0, 1.0);
    let n = p.dim();
    let eye = CMat::identity(n, n);
    let a_minus = &p.a - &eye * i_unit;
    let a_plus = &p.a + &eye * i_unit;
    let b_minus = &p.b - &eye * i_unit;
    let b_plus = &p.b + &eye * i_unit;
    let coord = |e: &ExtIndex| -> Result<CVec, MomentError> {
        match gns.coord(e) {
            Some(c) => Ok(c),
            None => gns.project_index(u, e),
        }
    };
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for e in enumerate_box(check_box) {
        let ce = coord(&e)?;
        scale = scale.max(max_abs_vec(&ce));
        for (slot, op) in
            [(Slot::K, &a_minus), (Slot::L, &a_plus), (Slot::R, &b_minus), (Slot::T, &b_plus)]
        {
            if let Some(prev) = e.shift(slot, -1) {
                if check_box.contains(&prev) {
                    let cp = coord(&prev)?;
                    worst = worst.max(max_abs_vec(&(op * cp - &ce)));
                }
            }
        }
    }
    Ok(worst / scale)
}

/// Largest residual of the cyclic factorization over `check_box`:
/// `c[m,k,l;n,r,t] = A^m (A-iI)^k (A+iI)^l B^n (B-iI)^r (B+iI)^t c0`,
/// with negative powers taken as inverses.
pub fn cyclic_factorization_residual(
    gns: &GnsSpace,
    p: &OperatorPair,
    u: &ExtMomentTable,
    check_box: &BoxSpec,
) -> Result<f64, MomentError> {
    let i_unit = Complex64::new(0.0, 1.0);
    let n = p.dim();
    let eye = CMat::identity(n, n);
    let a_minus = &p.a - &eye * i_unit;
    let a_plus = &p.a + &eye * i_unit;
    let b_minus = &p.b - &eye * i_unit;
    let b_plus = &p.b + &eye * i_unit;
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for e in enumerate_box(check_box) {
        let target = match gns.coord(&e) {
            Some(c) => c,
            None => gns.project_index(u, &e)?,
        };
        scale = scale.max(max_abs_vec(&target));
        let mut v = p.cyclic.clone();
        for (m, k) in [
            (&p.a, e.m),
            (&a_minus, e.k),
            (&a_plus, e.l),
            (&p.b, e.n),
            (&b_minus, e.r),
            (&b_plus, e.t),
        ] {
            v = matpow(m, k)? * v;
        }
        worst = worst.max(max_abs_vec(&(v - target)));
    }
    Ok(worst / scale)
}

fn matpow(m: &CMat, k: i32) -> Result<CMat, MomentError> {
    let n = m.nrows();
    let base = if k >= 0 {
        m.clone()
    } else {
        m.clone().try_inverse().ok_or(MomentError::SingularShift)?
    };
    let mut out = CMat::identity(n, n);
    for _ in 0..k.abs() {
        out *= &base;
    }
    Ok(out)
}

/// Pushforward of an atomic measure under the torus map
/// `e^{i phi} = (x + i)/(x - i)` in each variable; angles in `[0, 2 pi)`.
pub fn torus_transform(mu: &AtomicMeasure) -> Vec<(f64, f64, f64)> {
    let angle = |x: f64| -> f64 {
        let z = Complex64::new(x, 1.0) / Complex64::new(x, -1.0);
        let a = z.arg();
        if a < 0.0 {
            a + 2.0 * std::f64::consts::PI
        } else {
            a
        }
    };
    mu.atoms().iter().map(|a| (angle(a.x1), angle(a.x2), a.w)).collect()
}

/// Trigonometric moment `sum w e^{i k phi} e^{i l psi}` of torus atoms.
pub fn trig_moment(torus_atoms: &[(f64, f64, f64)], k: i32, l: i32) -> Complex64 {
    torus_atoms
        .iter()
        .map(|&(phi, psi, w)| {
            Complex64::new(0.0, (k as f64) * phi + (l as f64) * psi).exp()
                * Complex64::new(w, 0.0)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::build_gram_for_family;
    use crate::measure::matching_distance;
    use crate::table::moments_of_measure;
    use approx::assert_abs_diff_eq;

    fn solve_setup(
        mu: &AtomicMeasure,
        b: &BoxSpec,
    ) -> (ExtMomentTable, GnsSpace, OperatorPair) {
        let u = moments_of_measure(mu, b);
        let family = default_solve_family(b);
        let gram = build_gram_for_family(&u, &family).unwrap();
        let gns = gns_construct(&gram, TOL_RANK).unwrap();
        let pair = build_operators(&gns, &u).unwrap();
        (u, gns, pair)
    }

    #[test]
    fn recurrences_hold_on_oracle_and_catch_perturbation() {
        let mu = AtomicMeasure::new([(0.7, -0.4, 1.3), (1.5, 2.0, 0.2)]);
        let mut u = moments_of_measure(&mu, &BoxSpec::new(2, 2, 1));
        let scale = 1.0 + u.max_abs();
        let clean = check_recurrences(&u, 1e-9 * scale);
        assert!(clean.checked > 0);
        assert!(clean.violations.is_empty(), "residual {}", clean.max_residual);

        let key = ExtIndex::monomial(1, 0);
        *u.entries.get_mut(&key).unwrap() += Complex64::new(0.1, 0.0);
        let broken = check_recurrences(&u, 1e-9 * scale);
        assert!(broken.max_residual >= 0.099);
        assert!(broken.violations.iter().any(|(i, _)| *i == ExtIndex::zero()));
    }

    #[test]
    fn single_atom_operators_are_scalars() {
        let mu = AtomicMeasure::new([(2.0, 0.0, 1.0)]);
        let (_, gns, pair) = solve_setup(&mu, &BoxSpec::new(2, 2, 1));
        assert_eq!(gns.dim, 1);
        assert_abs_diff_eq!(pair.a[(0, 0)].re, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pair.a[(0, 0)].im, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pair.b[(0, 0)].norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn two_atom_operators_have_expected_spectra() {
        let mu = AtomicMeasure::new([(0.0, 0.0, 1.0), (1.0, 1.0, 1.0)]);
        let (_, gns, pair) = solve_setup(&mu, &BoxSpec::new(2, 2, 1));
        assert_eq!(gns.dim, 2);
        let (avals, _) = herm_eigen(&hermitize(&pair.a));
        assert_abs_diff_eq!(avals[0], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(avals[1], 1.0, epsilon = 1e-8);
        assert!(pair.sym_residual <= 1e-8);
        assert!(pair.comm_residual <= 1e-8);
    }

    #[test]
    fn cayley_of_scalars() {
        let mk = |v: f64| OperatorPair {
            a: CMat::from_element(1, 1, Complex64::new(v, 0.0)),
            b: CMat::zeros(1, 1),
            cyclic: CVec::from_element(1, Complex64::new(1.0, 0.0)),
            sym_residual: 0.0,
            comm_residual: 0.0,
        };
        let c0 = cayley(&mk(0.0)).unwrap();
        assert!((c0.ua[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        let c2 = cayley(&mk(2.0)).unwrap();
        assert!((c2.ua[(0, 0)] - Complex64::new(0.6, -0.8)).norm() < 1e-14);
        assert!(c2.unitarity_residual < 1e-14);
    }

    #[test]
    fn spectral_measure_of_scalar_pair() {
        let p = OperatorPair {
            a: CMat::from_element(1, 1, Complex64::new(2.0, 0.0)),
            b: CMat::zeros(1, 1),
            cyclic: CVec::from_element(1, Complex64::new(3.0f64.sqrt(), 0.0)),
            sym_residual: 0.0,
            comm_residual: 0.0,
        };
        let mu = joint_spectral_measure(&p).unwrap();
        assert_eq!(mu.len(), 1);
        let a = mu.atoms()[0];
        assert_abs_diff_eq!(a.x1, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.x2, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.w, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_cyclic_vector_gives_empty_measure() {
        let p = OperatorPair {
            a: CMat::identity(2, 2),
            b: CMat::identity(2, 2),
            cyclic: CVec::zeros(2),
            sym_residual: 0.0,
            comm_residual: 0.0,
        };
        assert!(joint_spectral_measure(&p).unwrap().is_empty());
    }

    #[test]
    fn solve_roundtrip_single_atom() {
        let mu = AtomicMeasure::new([(1.0, 2.0, 3.0)]);
        let u = moments_of_measure(&mu, &BoxSpec::new(2, 2, 1));
        let out = solve_extended(&u).unwrap();
        assert!(matching_distance(&mu, &out.measure) < 1e-8);
        assert!(out.report.recon_residual <= 1e-8);
    }

    #[test]
    fn solve_roundtrip_three_atoms() {
        let mu = AtomicMeasure::new([
            (-1.2, 0.3, 0.8),
            (0.4, -2.0, 1.5),
            (2.5, 1.1, 0.4),
        ]);
        let u = moments_of_measure(&mu, &BoxSpec::new(3, 3, 1));
        let out = solve_extended(&u).unwrap();
        assert!(matching_distance(&mu, &out.measure) < 1e-7);
    }

    #[test]
    fn zero_table_solves_to_empty_measure() {
        let u = moments_of_measure(&AtomicMeasure::empty(), &BoxSpec::new(1, 1, 1));
        let out = solve_extended(&u).unwrap();
        assert!(out.measure.is_empty());
        assert_eq!(out.report.gns_dim, 0);
    }

    #[test]
    fn broken_conjugation_fails_early() {
        let mu = AtomicMeasure::new([(0.5, 0.5, 1.0)]);
        let mut u = moments_of_measure(&mu, &BoxSpec::new(2, 2, 1));
        let key = ExtIndex::new(0, -1, 0, 0, 0, 0);
        *u.entries.get_mut(&key).unwrap() += Complex64::new(0.01, 0.0);
        let err = solve_extended(&u).unwrap_err();
        assert_eq!(err.stage, "conjugation");
    }

    #[test]
    fn resolvent_and_cyclic_relations_hold() {
        let mu = AtomicMeasure::new([(0.3, -1.0, 1.0), (1.7, 0.6, 0.5)]);
        let b = BoxSpec::new(4, 4, 3);
        let (u, gns, pair) = solve_setup(&mu, &b);
        let check = BoxSpec::new(1, 1, 1);
        let res = resolvent_residual(&gns, &pair, &u, &check).unwrap();
        assert!(res <= 1e-8, "resolvent residual {res}");
        let cyc = cyclic_factorization_residual(&gns, &pair, &u, &check).unwrap();
        assert!(cyc <= 1e-7, "cyclic residual {cyc}");
    }

    #[test]
    fn torus_transform_of_special_points() {
        let mu = AtomicMeasure::new([(0.0, 0.0, 1.0), (1.0, 0.0, 2.0)]);
        let t = torus_transform(&mu);
        let pi = std::f64::consts::PI;
        assert_abs_diff_eq!(t[0].0, pi, epsilon = 1e-14);
        assert_abs_diff_eq!(t[0].1, pi, epsilon = 1e-14);
        assert_abs_diff_eq!(t[1].0, pi / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t[1].2, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn trig_moments_match_extended_entries() {
        let mu = AtomicMeasure::new([(0.8, -0.2, 0.9), (-1.4, 2.2, 1.1)]);
        let u = moments_of_measure(&mu, &BoxSpec::new(0, 0, 3));
        let t = torus_transform(&mu);
        assert_abs_diff_eq!(trig_moment(&t, 0, 0).re, mu.total_mass(), epsilon = 1e-12);
        for k in -3..=3 {
            for l in -3..=3 {
                let lhs = trig_moment(&t, k, l);
                let rhs = u.get(&ExtIndex::new(0, k, -k, 0, l, -l)).unwrap();
                assert!((lhs - rhs).norm() < 1e-10, "mismatch at ({k},{l})");
            }
        }
    }
}
