//! Exact conversions between the truncated complex moment problem
//! `a[m, n] = ∫ z^m conj(z)^n dμ` and the two-dimensional power moment
//! problem `s[m, n] = ∫ x^m y^n dμ` under `z = x + iy`, plus a solver that
//! routes the complex problem through the power-moment machinery.
//!
//! The conversions are finite binomial sums with integer coefficients and
//! quarter-turn phases, evaluated exactly (up to one floating multiply per
//! term) for degrees up to [`MAX_DEGREE`].

use num_complex::Complex64;

use crate::error::MomentError;
use crate::extended::{SolveOutcome, StageFailure};
use crate::algorithm::principal_measure;
use crate::table::{ComplexMomentTable, MomentTable2D};

/// Largest degree for which the integer binomial coefficients are formed
/// exactly in `u128`.
pub const MAX_DEGREE: i32 = 20;

/// Relative tolerance on the conjugate symmetry `a[n, m] = conj(a[m, n])`
/// required of complex moment data.
pub const TOL_CONSISTENCY: f64 = 1e-9;

fn check_degree(degree: i32) -> Result<(), MomentError> {
    if degree > MAX_DEGREE {
        Err(MomentError::DegreeTooLarge { degree, limit: MAX_DEGREE })
    } else {
        Ok(())
    }
}

/// Exact binomial coefficient; panics beyond `u128` range (excluded by
/// [`MAX_DEGREE`]).
fn binom(n: i32, k: i32) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let mut acc: u128 = 1;
    for j in 0..k as u128 {
        acc = acc * (n as u128 - j) / (j + 1);
    }
    acc as f64
}

/// `i^p` for any integer `p`.
fn i_pow(p: i32) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Converts complex moments to power moments:
///
/// `s[m, n] = 2^{-m} (2i)^{-n} Σ_k Σ_j (-1)^{n-j} C(m,k) C(n,j) a[k+j, m-k+n-j]`.
///
/// The input is read on the total-degree triangle `p + q <= degree`; the
/// output is defined on the triangle `m + n <= degree`.
pub fn complex_to_real(a: &ComplexMomentTable) -> Result<MomentTable2D, MomentError> {
    check_degree(a.degree)?;
    let mut s = MomentTable2D::new(a.degree);
    for m in 0..=a.degree {
        for n in 0..=(a.degree - m) {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=m {
                for j in 0..=n {
                    let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += Complex64::new(sign * binom(m, k) * binom(n, j), 0.0)
                        * a.get(k + j, m - k + n - j)?;
                }
            }
            let scale = Complex64::new(2.0f64.powi(m), 0.0)
                * (Complex64::new(0.0, 2.0)).powi(n);
            s.entries.insert((m, n), acc / scale);
        }
    }
    Ok(s)
}

/// Converts power moments to complex moments:
///
/// `a[m, n] = Σ_r Σ_l C(m,r) C(n,l) (-1)^{n-l} i^{m-r+n-l} s[r+l, m-r+n-l]`.
///
/// The input is read on the total-degree triangle `m + n <= degree`; the
/// output is defined on the triangle `m + n <= degree`.
pub fn real_to_complex(s: &MomentTable2D) -> Result<ComplexMomentTable, MomentError> {
    check_degree(s.degree)?;
    let mut a = ComplexMomentTable::new(s.degree);
    for m in 0..=s.degree {
        for n in 0..=(s.degree - m) {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..=m {
                for l in 0..=n {
                    let sign = if (n - l) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += Complex64::new(sign * binom(m, r) * binom(n, l), 0.0)
                        * i_pow(m - r + n - l)
                        * s.get(r + l, m - r + n - l)?;
                }
            }
            a.entries.insert((m, n), acc);
        }
    }
    Ok(a)
}

/// Solves the truncated complex moment problem: checks the conjugate
/// symmetry of the data, converts to power moments, and recovers an atomic
/// measure on the plane (atoms `(Re z, Im z)`).
pub fn solve_complex(a: &ComplexMomentTable) -> Result<SolveOutcome, StageFailure> {
    let scale = 1.0 + a.max_abs();
    let res = a.conjugation_residual();
    if res > TOL_CONSISTENCY * scale {
        return Err(StageFailure {
            stage: "consistency",
            error: MomentError::ConsistencyFail { residual: res },
        });
    }
    let s = complex_to_real(a).map_err(|error| StageFailure { stage: "conversion", error })?;
    let s_res = s.realness_residual();
    if s_res > TOL_CONSISTENCY * scale {
        return Err(StageFailure {
            stage: "consistency",
            error: MomentError::ConsistencyFail { residual: s_res },
        });
    }
    principal_measure(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{matching_distance, AtomicMeasure};
    use crate::table::{complex_moments_of_measure, real_moments_of_measure};
    use approx::assert_abs_diff_eq;

    #[test]
    fn conversion_matches_direct_moments() {
        let mu = AtomicMeasure::new([(1.0, 2.0, 3.0), (-0.5, 0.25, 1.5)]);
        let a = complex_moments_of_measure(&mu, 6);
        let s = complex_to_real(&a).unwrap();
        let s_direct = real_moments_of_measure(&mu, 6);
        for (&(m, n), v) in &s.entries {
            let want = s_direct.get(m, n).unwrap();
            assert!((v - want).norm() < 1e-9 * (1.0 + a.max_abs()), "s[{m},{n}]");
        }
    }

    #[test]
    fn roundtrip_degree_eight() {
        let mu = AtomicMeasure::new([
            (1.0, 2.0, 3.0),
            (-0.5, 0.25, 1.5),
            (0.1, -1.2, 0.7),
        ]);
        let a = complex_moments_of_measure(&mu, 8);
        let s = complex_to_real(&a).unwrap();
        let back = real_to_complex(&s).unwrap();
        let scale = 1.0 + a.max_abs();
        for (&(m, n), v) in &back.entries {
            let want = a.get(m, n).unwrap();
            assert!((v - want).norm() < 1e-9 * scale, "a[{m},{n}] roundtrip");
        }
    }

    #[test]
    fn mass_is_preserved_exactly() {
        let mu = AtomicMeasure::new([(0.3, -0.4, 2.25)]);
        let a = complex_moments_of_measure(&mu, 4);
        let s = complex_to_real(&a).unwrap();
        // m = n = 0 involves no arithmetic beyond a unit scale
        assert_eq!(s.get(0, 0).unwrap(), a.get(0, 0).unwrap());
    }

    #[test]
    fn solve_complex_recovers_atom() {
        let mu = AtomicMeasure::new([(1.0, 2.0, 3.0)]);
        let a = complex_moments_of_measure(&mu, 4);
        let out = solve_complex(&a).unwrap();
        assert!(matching_distance(&mu, &out.measure) < 1e-6);
    }

    #[test]
    fn solve_complex_recovers_three_atoms() {
        let mu = AtomicMeasure::new([
            (1.0, 2.0, 3.0),
            (-0.5, 0.25, 1.5),
            (0.1, -1.2, 0.7),
        ]);
        let a = complex_moments_of_measure(&mu, 8);
        let out = solve_complex(&a).unwrap();
        assert!(matching_distance(&mu, &out.measure) < 1e-6);
    }

    #[test]
    fn broken_conjugate_symmetry_is_rejected() {
        let mu = AtomicMeasure::new([(1.0, 2.0, 3.0)]);
        let mut a = complex_moments_of_measure(&mu, 4);
        a.entries.insert((1, 0), a.get(1, 0).unwrap() + Complex64::new(0.01, 0.0));
        let err = solve_complex(&a).unwrap_err();
        assert_eq!(err.stage, "consistency");
    }

    #[test]
    fn degree_limit_is_enforced() {
        let a = ComplexMomentTable::new(21);
        assert!(matches!(
            complex_to_real(&a),
            Err(MomentError::DegreeTooLarge { degree: 21, limit: 20 })
        ));
    }

    #[test]
    fn binomials_are_exact() {
        assert_abs_diff_eq!(binom(20, 10), 184756.0, epsilon = 0.0);
        assert_abs_diff_eq!(binom(6, 3), 20.0, epsilon = 0.0);
        assert_abs_diff_eq!(binom(3, 5), 0.0, epsilon = 0.0);
    }
}
