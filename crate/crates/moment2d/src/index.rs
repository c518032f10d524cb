//! Index arithmetic for the extended moment problem.
//!
//! The extended moments are indexed by six-tuples `(m, k, l; n, r, t)` with
//! `m, n >= 0` and `k, l, r, t` arbitrary integers. The sub-family with
//! `k = l = r = t = 0` corresponds to plain monomial moments; everything else
//! carries resolvent-type factors `(x ± i)`.

use serde::{Deserialize, Serialize};

/// Index `(m, k, l; n, r, t)` of an extended moment.
///
/// The derived `Ord` is lexicographic on `(m, k, l, n, r, t)`, which is also
/// the tie-break order used by [`index_order`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct ExtIndex {
    pub m: i32,
    pub k: i32,
    pub l: i32,
    pub n: i32,
    pub r: i32,
    pub t: i32,
}

impl ExtIndex {
    pub fn new(m: i32, k: i32, l: i32, n: i32, r: i32, t: i32) -> Self {
        assert!(m >= 0 && n >= 0, "monomial exponents must be non-negative");
        ExtIndex { m, k, l, n, r, t }
    }

    /// The pure-monomial index `(m, 0, 0; n, 0, 0)`.
    pub fn monomial(m: i32, n: i32) -> Self {
        ExtIndex::new(m, 0, 0, n, 0, 0)
    }

    pub fn zero() -> Self {
        ExtIndex::monomial(0, 0)
    }

    /// True iff `k = l = r = t = 0`.
    pub fn is_omega0(&self) -> bool {
        self.k == 0 && self.l == 0 && self.r == 0 && self.t == 0
    }

    /// Total weight `m + n + |k| + |l| + |r| + |t|`.
    pub fn weight(&self) -> i32 {
        self.m + self.n + self.k.abs() + self.l.abs() + self.r.abs() + self.t.abs()
    }

    /// Index of the conjugate integrand: swaps `k <-> l` and `r <-> t`.
    pub fn mirror(&self) -> Self {
        ExtIndex { m: self.m, k: self.l, l: self.k, n: self.n, r: self.t, t: self.r }
    }

    /// Sum index of the sesquilinear pairing of `self` (first slot) with
    /// `other` (second slot): `(m+m', k+l', l+k'; n+n', r+t', t+r')`.
    ///
    /// The cross-over of `k` with `l'` (and `r` with `t'`) comes from
    /// conjugating the second integrand, which swaps its `(x + i)` and
    /// `(x - i)` factors.
    pub fn pairing_sum(&self, other: &ExtIndex) -> ExtIndex {
        ExtIndex {
            m: self.m + other.m,
            k: self.k + other.l,
            l: self.l + other.k,
            n: self.n + other.n,
            r: self.r + other.t,
            t: self.t + other.r,
        }
    }

    /// Unit shift in one exponent slot.
    pub fn shift(&self, slot: Slot, by: i32) -> Option<ExtIndex> {
        let mut i = *self;
        let field = match slot {
            Slot::M => &mut i.m,
            Slot::K => &mut i.k,
            Slot::L => &mut i.l,
            Slot::N => &mut i.n,
            Slot::R => &mut i.r,
            Slot::T => &mut i.t,
        };
        *field += by;
        if i.m < 0 || i.n < 0 {
            None
        } else {
            Some(i)
        }
    }
}

/// Exponent slot of an [`ExtIndex`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Slot {
    M,
    K,
    L,
    N,
    R,
    T,
}

/// Rectangular truncation box: `m <= m_max`, `n <= n_max`,
/// `max(|k|,|l|,|r|,|t|) <= k_abs_max`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BoxSpec {
    pub m_max: i32,
    pub n_max: i32,
    pub k_abs_max: i32,
}

impl BoxSpec {
    pub fn new(m_max: i32, n_max: i32, k_abs_max: i32) -> Self {
        assert!(m_max >= 0 && n_max >= 0 && k_abs_max >= 0, "box bounds must be non-negative");
        BoxSpec { m_max, n_max, k_abs_max }
    }

    pub fn contains(&self, i: &ExtIndex) -> bool {
        i.m >= 0
            && i.n >= 0
            && i.m <= self.m_max
            && i.n <= self.n_max
            && i.k.abs() <= self.k_abs_max
            && i.l.abs() <= self.k_abs_max
            && i.r.abs() <= self.k_abs_max
            && i.t.abs() <= self.k_abs_max
    }

    /// Sub-box with every bound reduced by one, so that any unit shift of a
    /// core index stays inside `self`. Empty (`None`) when a bound is 0.
    pub fn core_box(&self) -> Option<BoxSpec> {
        if self.m_max == 0 || self.n_max == 0 || self.k_abs_max == 0 {
            None
        } else {
            Some(BoxSpec::new(self.m_max - 1, self.n_max - 1, self.k_abs_max - 1))
        }
    }

    /// Largest index weight attainable inside the box.
    pub fn max_weight(&self) -> i32 {
        self.m_max + self.n_max + 4 * self.k_abs_max
    }

    /// Number of indices in the box.
    pub fn len(&self) -> usize {
        let kk = (2 * self.k_abs_max + 1) as usize;
        (self.m_max + 1) as usize * (self.n_max + 1) as usize * kk * kk * kk * kk
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// All indices of the box in the canonical order: the monomial part first,
/// sorted by `(m, n)`, then the remaining indices in [`index_order`] order.
pub fn enumerate_box(b: &BoxSpec) -> Vec<ExtIndex> {
    let mut out = Vec::with_capacity(b.len());
    for m in 0..=b.m_max {
        for n in 0..=b.n_max {
            out.push(ExtIndex::monomial(m, n));
        }
    }
    for w in 1..=b.max_weight() {
        for i in omega_prime_of_weight(w) {
            if b.contains(&i) {
                out.push(i);
            }
        }
    }
    out
}

/// All indices outside the monomial family with the given total weight,
/// sorted lexicographically on `(m, k, l, n, r, t)`.
pub fn omega_prime_of_weight(weight: i32) -> Vec<ExtIndex> {
    assert!(weight >= 1);
    let mut out = Vec::new();
    for m in 0..=weight {
        for n in 0..=(weight - m) {
            let rest = weight - m - n;
            if rest == 0 {
                continue; // monomial index
            }
            for ka in 0..=rest {
                for la in 0..=(rest - ka) {
                    for ra in 0..=(rest - ka - la) {
                        let ta = rest - ka - la - ra;
                        for k in signed(ka) {
                            for l in signed(la) {
                                for r in signed(ra) {
                                    for t in signed(ta) {
                                        out.push(ExtIndex { m, k, l, n, r, t });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn signed(abs: i32) -> Vec<i32> {
    if abs == 0 {
        vec![0]
    } else {
        vec![-abs, abs]
    }
}

/// The fixed enumeration `j >= 1` of indices outside the monomial family:
/// increasing total weight, ties broken lexicographically on
/// `(m, k, l, n, r, t)`.
pub fn index_order(j: usize) -> ExtIndex {
    assert!(j >= 1, "index_order is 1-based");
    let mut remaining = j;
    for w in 1.. {
        let level = omega_prime_of_weight(w);
        if remaining <= level.len() {
            return level[remaining - 1];
        }
        remaining -= level.len();
    }
    unreachable!()
}

/// Inverse of [`index_order`]. Returns `None` for monomial indices.
pub fn index_order_inverse(i: &ExtIndex) -> Option<usize> {
    if i.is_omega0() {
        return None;
    }
    let w = i.weight();
    let mut j = 0usize;
    for lower in 1..w {
        j += omega_prime_of_weight(lower).len();
    }
    let level = omega_prime_of_weight(w);
    let pos = level.binary_search(i).expect("weight level must contain its own index");
    Some(j + pos + 1)
}

/// The first `count` indices of the [`index_order`] enumeration.
pub fn index_order_prefix(count: usize) -> Vec<ExtIndex> {
    let mut out = Vec::with_capacity(count);
    let mut w = 1;
    while out.len() < count {
        for i in omega_prime_of_weight(w) {
            if out.len() == count {
                break;
            }
            out.push(i);
        }
        w += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn box_000_is_single_index() {
        assert_eq!(enumerate_box(&BoxSpec::new(0, 0, 0)), vec![ExtIndex::zero()]);
    }

    #[test]
    fn box_100_is_monomials_only() {
        assert_eq!(
            enumerate_box(&BoxSpec::new(1, 0, 0)),
            vec![ExtIndex::zero(), ExtIndex::monomial(1, 0)]
        );
    }

    #[test]
    fn box_111_has_324_indices() {
        // 2 * 2 * 3^4 by direct product count.
        let b = BoxSpec::new(1, 1, 1);
        let all = enumerate_box(&b);
        assert_eq!(all.len(), 324);
        assert_eq!(b.len(), 324);
        // monomial part first, sorted by (m, n)
        assert!(all[..4].iter().all(|i| i.is_omega0()));
        assert!(all[4..].iter().all(|i| !i.is_omega0()));
        // no duplicates
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 324);
    }

    #[test]
    fn first_enumerated_index_is_k_minus_one() {
        assert_eq!(index_order(1), ExtIndex::new(0, -1, 0, 0, 0, 0));
        // all eight weight-1 indices, in order
        let expect = [
            (0, -1, 0, 0, 0, 0),
            (0, 0, -1, 0, 0, 0),
            (0, 0, 0, 0, -1, 0),
            (0, 0, 0, 0, 0, -1),
            (0, 0, 0, 0, 0, 1),
            (0, 0, 0, 0, 1, 0),
            (0, 0, 1, 0, 0, 0),
            (0, 1, 0, 0, 0, 0),
        ];
        for (j, &(m, k, l, n, r, t)) in expect.iter().enumerate() {
            assert_eq!(index_order(j + 1), ExtIndex::new(m, k, l, n, r, t));
        }
    }

    #[test]
    fn index_order_is_injective_and_invertible() {
        let prefix = index_order_prefix(10_000);
        let mut seen = prefix.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 10_000);
        for (j, i) in prefix.iter().enumerate() {
            assert!(!i.is_omega0());
            assert_eq!(index_order_inverse(i), Some(j + 1));
        }
    }

    #[test]
    fn core_box_shifts_stay_inside() {
        let b = BoxSpec::new(2, 3, 1);
        let core = b.core_box().unwrap();
        for i in enumerate_box(&core) {
            for slot in [Slot::M, Slot::K, Slot::L, Slot::N, Slot::R, Slot::T] {
                for by in [-1, 1] {
                    if let Some(s) = i.shift(slot, by) {
                        assert!(b.contains(&s));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn pairing_sum_mirrors_under_swap(
            m in 0..3i32, k in -2..3i32, l in -2..3i32,
            n in 0..3i32, r in -2..3i32, t in -2..3i32,
            m2 in 0..3i32, k2 in -2..3i32, l2 in -2..3i32,
            n2 in 0..3i32, r2 in -2..3i32, t2 in -2..3i32,
        ) {
            let a = ExtIndex::new(m, k, l, n, r, t);
            let b = ExtIndex::new(m2, k2, l2, n2, r2, t2);
            // pairing in the opposite order gives the mirrored sum index
            prop_assert_eq!(a.pairing_sum(&b).mirror(), b.pairing_sum(&a));
        }
    }
}
