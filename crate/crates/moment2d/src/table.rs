//! Moment tables on finite index boxes, and the direct-summation oracle that
//! produces them from atomic measures.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::MomentError;
use crate::index::{enumerate_box, BoxSpec, ExtIndex};
use crate::measure::AtomicMeasure;

/// Plain power moments `s[m, n]`, stored on the rectangle
/// `0 <= m, n <= degree` (a superset of the total-degree triangle).
///
/// Entries are complex so that violations of realness are representable and
/// detectable rather than silently impossible.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable2D {
    pub degree: i32,
    pub entries: BTreeMap<(i32, i32), Complex64>,
}

impl MomentTable2D {
    pub fn new(degree: i32) -> Self {
        assert!(degree >= 0);
        MomentTable2D { degree, entries: BTreeMap::new() }
    }

    pub fn get(&self, m: i32, n: i32) -> Result<Complex64, MomentError> {
        self.entries
            .get(&(m, n))
            .copied()
            .ok_or(MomentError::MissingMoment { m, n })
    }

    /// Largest residual of the realness requirement `Im s[m, n] = 0`.
    pub fn realness_residual(&self) -> f64 {
        self.entries.values().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Extended moments `u[m, k, l; n, r, t]` on a truncation box. The entry map
/// may be partial; operations that need an absent entry report it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtMomentTable {
    pub box_spec: BoxSpec,
    pub entries: BTreeMap<ExtIndex, Complex64>,
}

impl ExtMomentTable {
    pub fn new(box_spec: BoxSpec) -> Self {
        ExtMomentTable { box_spec, entries: BTreeMap::new() }
    }

    pub fn get(&self, i: &ExtIndex) -> Result<Complex64, MomentError> {
        self.entries
            .get(i)
            .copied()
            .ok_or(MomentError::MissingExtMoment { index: *i })
    }

    /// True when every box index has an entry.
    pub fn is_total(&self) -> bool {
        enumerate_box(&self.box_spec).iter().all(|i| self.entries.contains_key(i))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest residual of `conj(u[m,k,l;n,r,t]) = u[m,l,k;n,t,r]` over entry
    /// pairs present in the table.
    pub fn conjugation_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, v) in &self.entries {
            if let Some(w) = self.entries.get(&i.mirror()) {
                worst = worst.max((v.conj() - w).norm());
            }
        }
        worst
    }
}

/// Complex moments `a[m, n]` of a measure on the complex plane, stored on the
/// rectangle `0 <= m, n <= degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMomentTable {
    pub degree: i32,
    pub entries: BTreeMap<(i32, i32), Complex64>,
}

impl ComplexMomentTable {
    pub fn new(degree: i32) -> Self {
        assert!(degree >= 0);
        ComplexMomentTable { degree, entries: BTreeMap::new() }
    }

    pub fn get(&self, m: i32, n: i32) -> Result<Complex64, MomentError> {
        self.entries
            .get(&(m, n))
            .copied()
            .ok_or(MomentError::MissingMoment { m, n })
    }

    /// Largest residual of `conj(a[m, n]) = a[n, m]`, which holds for moments
    /// of any non-negative measure.
    pub fn conjugation_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (&(m, n), v) in &self.entries {
            if let Some(w) = self.entries.get(&(n, m)) {
                worst = worst.max((v.conj() - w).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Value of the extended integrand
/// `x1^m (x1+i)^k (x1-i)^l x2^n (x2+i)^r (x2-i)^t` at a real point.
///
/// Negative exponents are reciprocals; `|x ± i| >= 1` for real `x`, so the
/// integrand is never singular.
pub fn ext_integrand(x1: f64, x2: f64, i: &ExtIndex) -> Complex64 {
    // The two resolvent powers of each variable are computed separately and
    // multiplied as one pair: complex multiplication of the pair is exactly
    // commutative in floating point, so the value at the mirror index is the
    // exact conjugate and oracle tables are conjugation-symmetric to the bit.
    let var = |x: f64, m: i32, k: i32, l: i32| -> Complex64 {
        let plus = Complex64::new(x, 1.0).powi(k);
        let minus = Complex64::new(x, -1.0).powi(l);
        Complex64::new(x, 0.0).powi(m) * (plus * minus)
    };
    var(x1, i.m, i.k, i.l) * var(x2, i.n, i.r, i.t)
}

/// Extended moments of an atomic measure on a box, by direct summation.
/// This is the oracle every solver output is checked against.
pub fn moments_of_measure(mu: &AtomicMeasure, box_spec: &BoxSpec) -> ExtMomentTable {
    let mut table = ExtMomentTable::new(*box_spec);
    for i in enumerate_box(box_spec) {
        let v: Complex64 = mu
            .atoms()
            .iter()
            .map(|a| Complex64::new(a.w, 0.0) * ext_integrand(a.x1, a.x2, &i))
            .sum();
        table.entries.insert(i, v);
    }
    table
}

/// Single extended moment of an atomic measure, without materializing a box.
pub fn moment_of_measure_at(mu: &AtomicMeasure, i: &ExtIndex) -> Complex64 {
    mu.atoms()
        .iter()
        .map(|a| Complex64::new(a.w, 0.0) * ext_integrand(a.x1, a.x2, i))
        .sum()
}

/// Plain power moments `s[m, n] = sum w x1^m x2^n` on `0 <= m, n <= degree`.
pub fn real_moments_of_measure(mu: &AtomicMeasure, degree: i32) -> MomentTable2D {
    let mut table = MomentTable2D::new(degree);
    for m in 0..=degree {
        for n in 0..=degree {
            let v: f64 = mu
                .atoms()
                .iter()
                .map(|a| a.w * a.x1.powi(m) * a.x2.powi(n))
                .sum();
            table.entries.insert((m, n), Complex64::new(v, 0.0));
        }
    }
    table
}

/// Complex moments `a[m, n] = sum w z^m conj(z)^n` with `z = x1 + i x2`.
pub fn complex_moments_of_measure(mu: &AtomicMeasure, degree: i32) -> ComplexMomentTable {
    let mut table = ComplexMomentTable::new(degree);
    for m in 0..=degree {
        for n in 0..=degree {
            let v: Complex64 = mu
                .atoms()
                .iter()
                .map(|a| {
                    let z = Complex64::new(a.x1, a.x2);
                    Complex64::new(a.w, 0.0) * z.powi(m) * z.conj().powi(n)
                })
                .sum();
            table.entries.insert((m, n), v);
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_at_origin_basic_entries() {
        let mu = AtomicMeasure::new([(0.0, 0.0, 1.0)]);
        let u = moments_of_measure(&mu, &BoxSpec::new(1, 1, 1));
        // (0 + i)^1 = i
        assert_eq!(u.get(&ExtIndex::new(0, 1, 0, 0, 0, 0)).unwrap(), c(0.0, 1.0));
        // i^(k - l + r - t) at the origin
        for k in -1..=1 {
            for l in -1..=1 {
                for r in -1..=1 {
                    for t in -1..=1 {
                        let i = ExtIndex::new(0, k, l, 0, r, t);
                        let expect = c(0.0, 1.0).powi(k - l + r - t);
                        assert_abs_diff_eq!(
                            u.get(&i).unwrap().re,
                            expect.re,
                            epsilon = 1e-14
                        );
                        assert_abs_diff_eq!(
                            u.get(&i).unwrap().im,
                            expect.im,
                            epsilon = 1e-14
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn single_atom_product_moment() {
        let mu = AtomicMeasure::new([(1.0, 2.0, 3.0)]);
        let u = moments_of_measure(&mu, &BoxSpec::new(1, 1, 0));
        assert_eq!(u.get(&ExtIndex::monomial(1, 1)).unwrap(), c(6.0, 0.0));
        let s = real_moments_of_measure(&mu, 2);
        assert_eq!(s.get(0, 1).unwrap(), c(6.0, 0.0));
        assert_eq!(s.get(2, 0).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn empty_measure_has_zero_moments() {
        let s = real_moments_of_measure(&AtomicMeasure::empty(), 3);
        assert!(s.entries.values().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn two_atom_monomial_moments() {
        let mu = AtomicMeasure::new([(0.0, 0.0, 1.0), (1.0, 1.0, 1.0)]);
        let s = real_moments_of_measure(&mu, 3);
        for m in 0..=3 {
            for n in 0..=3 {
                let expect = if m == 0 && n == 0 { 2.0 } else { 1.0 };
                assert_abs_diff_eq!(s.get(m, n).unwrap().re, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn omega0_restriction_matches_real_moments() {
        let mu = AtomicMeasure::new([(0.5, -1.5, 0.7), (2.0, 1.0, 1.2)]);
        let u = moments_of_measure(&mu, &BoxSpec::new(3, 3, 1));
        let s = real_moments_of_measure(&mu, 3);
        for m in 0..=3 {
            for n in 0..=3 {
                let a = u.get(&ExtIndex::monomial(m, n)).unwrap();
                let b = s.get(m, n).unwrap();
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn oracle_tables_are_conjugation_symmetric(
            atoms in proptest::collection::vec(
                (-3.0..3.0f64, -3.0..3.0f64, 0.01..2.0f64), 1..6),
        ) {
            let mu = AtomicMeasure::new(atoms);
            let u = moments_of_measure(&mu, &BoxSpec::new(2, 2, 2));
            prop_assert!(u.conjugation_residual() <= 1e-12 * (1.0 + u.max_abs()));
        }
    }
}
