//! The step-wise extension algorithm at finite depth: starting from plain
//! power moments, construct candidate extended moment sequences one
//! enumeration direction `w(r)` at a time inside a model space, then hand
//! each candidate to the extended solver.
//!
//! The model space is `C^{h0_dim + slots}`: a block realizing the plain
//! moment kernel plus one adjoined orthonormal direction `e_j` per step. At
//! step `r` the candidate `h_{w(r)}` is sought as a combination of the
//! orthonormalized kernel basis, the previously adjoined directions, and a
//! non-negative component along `e_r`; the admissible coefficient sets are
//! affine (solved parametrically) with the norm `d_r` constrained by the
//! moment-derived bound `M_r`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::MomentError;
use crate::extended::{solve_with_family, SolveOutcome, StageFailure};
use crate::gram::{build_gram_2d, build_gram_for_family, gns_construct, psd_check, PsdReport, TOL_PSD, TOL_RANK};
use crate::index::{index_order, BoxSpec, ExtIndex, Slot};
use crate::linalg::{max_abs, max_abs_vec, pinv, CMat, CVec};
use crate::linsolve::{parametric_gauss, residual as system_residual, TOL_PIVOT};
use crate::measure::{matching_distance, AtomicMeasure};
use crate::table::{moment_of_measure_at, ExtMomentTable, MomentTable2D};

/// Relative tolerance for accepting step-system solutions.
pub const TOL_SYS: f64 = 1e-8;
/// Relative tolerance for pairing-value conflicts while extending states.
pub const TOL_CONFLICT: f64 = 1e-7;
/// Relative tolerance for the final reproduction of the input moments.
pub const TOL_REPRO: f64 = 1e-6;

/// The inner product `(x, y) = sum x_i conj(y_i)` (linear in the
/// first argument).
fn ip(x: &CVec, y: &CVec) -> Complex64 {
    y.dotc(x)
}

/// Finite model space: the kernel block of the plain moment Gram matrix plus
/// reserved one-dimensional extension slots.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    /// Rank of the plain moment kernel block.
    pub h0_dim: usize,
    /// Total ambient dimension `h0_dim + slots`.
    pub ambient: usize,
    /// Degree bound of the monomial family realized in the block.
    pub deg: i32,
    /// Kernel vectors `h_{m,n}` (ambient coordinates, extension slots zero).
    pub h0_coords: BTreeMap<(i32, i32), CVec>,
    /// Orthonormal basis of the kernel block, Gram-Schmidt over `h_{m,n}` in
    /// `(m, n)` order.
    pub ortho_basis: Vec<CVec>,
    /// Extended indices with only non-negative resolvent exponents: their
    /// vectors are polynomial combinations of the kernel block, e.g.
    /// `h_{(m,1,0;n)} = h_{(m+1,n)} + i h_{(m,n)}`. Pairing the step
    /// candidates against them pins the moment recurrences.
    pub derived: BTreeMap<ExtIndex, CVec>,
}

impl ModelSpace {
    /// The adjoined direction `e_j` (1-based).
    pub fn e_slot(&self, j: usize) -> CVec {
        assert!(j >= 1 && self.h0_dim + j <= self.ambient);
        let mut v = CVec::zeros(self.ambient);
        v[self.h0_dim + j - 1] = Complex64::new(1.0, 0.0);
        v
    }
}

/// Builds the model space from the plain moments: monomials of total degree
/// `<= deg`, with `slots` extension directions reserved.
pub fn build_model_space(
    s: &MomentTable2D,
    deg: i32,
    slots: usize,
) -> Result<ModelSpace, MomentError> {
    let gram = build_gram_2d(s, deg)?;
    let report = psd_check(&gram, TOL_PSD)?;
    if !report.is_psd {
        return Err(MomentError::NotPsd { min_eig: report.min_eig });
    }
    let gns = gns_construct(&gram, TOL_RANK)?;
    let h0_dim = gns.dim;
    let ambient = h0_dim + slots;
    let mut h0_coords = BTreeMap::new();
    for (c, idx) in gns.indices.iter().enumerate() {
        let mut v = CVec::zeros(ambient);
        v.rows_mut(0, h0_dim).copy_from(&gns.coords.column(c));
        h0_coords.insert((idx.m, idx.n), v);
    }
    // Gram-Schmidt over h_{m,n} in (m, n) order.
    let mut ortho_basis: Vec<CVec> = Vec::new();
    let scale = h0_coords
        .values()
        .map(|v| max_abs_vec(v))
        .fold(0.0f64, f64::max);
    for v in h0_coords.values() {
        let mut w = v.clone();
        for g in &ortho_basis {
            let c = ip(&w, g);
            w -= g * c;
        }
        let norm = w.norm();
        if norm > 1e-10 * (1.0 + scale) {
            ortho_basis.push(w.unscale(norm));
        }
    }
    debug_assert_eq!(ortho_basis.len(), h0_dim);

    // Indices x1^m (x1+i)^k (x1-i)^l x2^n (x2+i)^r (x2-i)^t with k,l,r,t >= 0
    // expand into monomials of total degree m+k+l+n+r+t.
    let i_pow = |p: i32| -> Complex64 {
        match p.rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    };
    let mut derived = BTreeMap::new();
    for m in 0..=deg {
        for k in 0..=(deg - m) {
            for l in 0..=(deg - m - k) {
                for n in 0..=(deg - m - k - l) {
                    for r in 0..=(deg - m - k - l - n) {
                        for t in 0..=(deg - m - k - l - n - r) {
                            if k == 0 && l == 0 && r == 0 && t == 0 {
                                continue;
                            }
                            let mut v = CVec::zeros(ambient);
                            for a in 0..=k {
                                for bb in 0..=l {
                                    for c in 0..=r {
                                        for d in 0..=t {
                                            let coeff = binom(k, a)
                                                * binom(l, bb)
                                                * binom(r, c)
                                                * binom(t, d)
                                                * Complex64::new(1.0, 0.0);
                                            let phase = i_pow(k - a) * i_pow(-(l - bb))
                                                * i_pow(r - c)
                                                * i_pow(-(t - d));
                                            let mono = &h0_coords[&(m + a + bb, n + c + d)];
                                            v += mono * (coeff * phase);
                                        }
                                    }
                                }
                            }
                            derived.insert(ExtIndex::new(m, k, l, n, r, t), v);
                        }
                    }
                }
            }
        }
    }

    Ok(ModelSpace { h0_dim, ambient, deg, h0_coords, ortho_basis, derived })
}

/// Exact small binomial coefficient as a float.
fn binom(n: i32, k: i32) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Norm bound `M` for the candidate at `idx`: the moment expansion of
/// `x1^{2m} (x1^2+1)^{k+ + l+} x2^{2n} (x2^2+1)^{r+ + t+}`, with negative
/// resolvent exponents clamped (their factors are bounded by 1).
pub fn compute_m_bound(s: &MomentTable2D, idx: &ExtIndex) -> Result<f64, MomentError> {
    let kp = idx.k.max(0) + idx.l.max(0);
    let rp = idx.r.max(0) + idx.t.max(0);
    let mut m = 0.0f64;
    for p in 0..=kp {
        for q in 0..=rp {
            let v = s.get(2 * idx.m + 2 * p, 2 * idx.n + 2 * q)?;
            m += binom(kp, p) * binom(rp, q) * v.re;
        }
    }
    Ok(m)
}

/// Step-0 verdict: realness of the data, positivity of the plain kernel, and
/// fidelity of the model pairings to the prescribed moments (which is the
/// dependence-on-sum requirement for pure monomial indices).
#[derive(Clone, Debug)]
pub struct Step0Report {
    pub realness_residual: f64,
    pub psd: PsdReport,
    pub pairing_residual: f64,
    pub passed: bool,
}

pub fn step0_check(ms: &ModelSpace, s: &MomentTable2D) -> Result<Step0Report, MomentError> {
    let gram = build_gram_2d(s, ms.deg)?;
    let psd = psd_check(&gram, TOL_PSD)?;
    let scale = 1.0 + s.max_abs();
    let realness_residual = s.realness_residual();
    let mut pairing_residual = 0.0f64;
    for ((m, n), h) in &ms.h0_coords {
        for ((m2, n2), h2) in &ms.h0_coords {
            if let Ok(v) = s.get(m + m2, n + n2) {
                pairing_residual = pairing_residual.max((ip(h, h2) - v).norm());
            }
        }
    }
    let passed =
        psd.is_psd && realness_residual <= 1e-9 * scale && pairing_residual <= 1e-8 * scale;
    Ok(Step0Report { realness_residual, psd, pairing_residual, passed })
}

/// One extension state: the constructed `h` vectors, the pairing function
/// values determined so far, the norms `d_j`, and the sign pattern of the
/// adjoined components.
#[derive(Clone, Debug)]
pub struct StepState {
    pub depth: usize,
    /// Constructed vectors: the monomial family plus `w(1) ... w(depth)`.
    pub h: BTreeMap<ExtIndex, CVec>,
    /// Determined pairing values, keyed by pairing-sum index.
    pub phi: BTreeMap<ExtIndex, Complex64>,
    pub d_values: Vec<f64>,
    /// Whether each step's `e_j` component is strictly positive.
    pub sign_pattern: Vec<bool>,
    /// Cumulative worst pairing-conflict residual along this branch.
    pub conflict: f64,
}

impl StepState {
    /// Initial state: the monomial block with all its pairings recorded, plus
    /// every prescribed plain moment as an already-determined pairing value.
    pub fn initial(ms: &ModelSpace, s: &MomentTable2D) -> Self {
        let mut h = BTreeMap::new();
        for (&(m, n), v) in &ms.h0_coords {
            h.insert(ExtIndex::monomial(m, n), v.clone());
        }
        let mut phi = BTreeMap::new();
        let all: Vec<(&ExtIndex, &CVec)> =
            h.iter().chain(ms.derived.iter()).collect();
        for (i, hi) in &all {
            for (j, hj) in &all {
                phi.insert(i.pairing_sum(j), ip(hi, hj));
            }
        }
        for (&(m, n), &v) in &s.entries {
            phi.entry(ExtIndex::monomial(m, n)).or_insert(v);
        }
        StepState { depth: 0, h, phi, d_values: Vec::new(), sign_pattern: Vec::new(), conflict: 0.0 }
    }

    /// All vectors visible to the step systems: the constructed family plus
    /// the model space's derived polynomial indices not yet constructed.
    fn visible<'a>(&'a self, ms: &'a ModelSpace) -> Vec<(&'a ExtIndex, &'a CVec)> {
        let mut out: Vec<(&ExtIndex, &CVec)> = self.h.iter().collect();
        for (i, v) in &ms.derived {
            if !self.h.contains_key(i) {
                out.push((i, v));
            }
        }
        out
    }
}

/// Unknown slots of a step system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unknown {
    /// Coefficient of the `n`-th orthonormal kernel basis vector (0-based).
    Alpha(usize),
    /// Coefficient of the adjoined direction `e_j` (1-based, `j < r`).
    Beta(usize),
}

/// The assembled linear system of one step.
#[derive(Clone, Debug)]
pub struct StepSystem {
    pub amat: CMat,
    pub f: CVec,
    pub layout: Vec<Unknown>,
}

fn layout_for(ms: &ModelSpace, r: usize, pattern: Option<&[bool]>) -> Vec<Unknown> {
    let mut layout: Vec<Unknown> = (0..ms.h0_dim).map(Unknown::Alpha).collect();
    for j in 1..r {
        let include = pattern.map(|p| p[j - 1]).unwrap_or(true);
        if include {
            layout.push(Unknown::Beta(j));
        }
    }
    layout
}

fn basis_matrix(ms: &ModelSpace, layout: &[Unknown]) -> CMat {
    let mut b = CMat::zeros(ms.ambient, layout.len());
    for (c, u) in layout.iter().enumerate() {
        let v = match u {
            Unknown::Alpha(n) => ms.ortho_basis[*n].clone(),
            Unknown::Beta(j) => ms.e_slot(*j),
        };
        b.set_column(c, &v);
    }
    b
}

/// Collects the linear constraints of step `r` on the coefficients of
/// `h_{w(r)}`: pairing values already pinned by the partial pairing function,
/// equal-pairing-sum difference relations, and every shift identity instance
/// that stays within the constructed family, paired against each constructed
/// observer.
pub fn assemble_step_system(
    ms: &ModelSpace,
    state: &StepState,
    r: usize,
    pattern: Option<&[bool]>,
) -> StepSystem {
    let omega = index_order(r);
    let layout = layout_for(ms, r, pattern);
    let b = basis_matrix(ms, &layout);
    let ncols = layout.len();
    let mut rows: Vec<CVec> = Vec::new();
    let mut rhs: Vec<Complex64> = Vec::new();

    // Coefficient row of <candidate, h_obs>: entry c = <b_c, h_obs>.
    let obs_row = |hobs: &CVec| -> CVec {
        CVec::from_fn(ncols, |c, _| ip(&b.column(c).into_owned(), hobs))
    };

    let visible = state.visible(ms);
    let vis: BTreeMap<&ExtIndex, &CVec> = visible.iter().copied().collect();

    // (a) pinned pairings: <h_omega, h_j> must equal an already determined
    // pairing value (either orientation).
    for (j, hj) in &visible {
        if let Some(&v) = state.phi.get(&omega.pairing_sum(j)) {
            rows.push(obs_row(hj));
            rhs.push(v);
        }
        if let Some(&v) = state.phi.get(&j.pairing_sum(&omega)) {
            rows.push(obs_row(hj));
            rhs.push(v.conj());
        }
    }

    // (b) difference rows: equal pairing sums force equal pairings even when
    // the common value is not yet determined.
    let mut by_sum: BTreeMap<ExtIndex, Vec<&ExtIndex>> = BTreeMap::new();
    for (j, _) in &visible {
        by_sum.entry(omega.pairing_sum(j)).or_default().push(j);
    }
    for (sum, group) in &by_sum {
        if state.phi.contains_key(sum) {
            continue; // already handled as pinned rows
        }
        for pair in group.windows(2) {
            let row = obs_row(vis[pair[0]]) - obs_row(vis[pair[1]]);
            rows.push(row);
            rhs.push(Complex64::new(0.0, 0.0));
        }
    }

    // (c) shift identity instances h_up + sign*i*h_base - h_side = 0 paired
    // against observers; only instances whose three indices are all
    // constructed (or the candidate itself) are imposed.
    let i_unit = Complex64::new(0.0, 1.0);
    let relations = [
        (Slot::M, Slot::K, i_unit),
        (Slot::M, Slot::L, -i_unit),
        (Slot::N, Slot::R, i_unit),
        (Slot::N, Slot::T, -i_unit),
    ];
    let known = |idx: &ExtIndex| vis.contains_key(idx);
    let mut triples: Vec<[(ExtIndex, Complex64); 3]> = Vec::new();
    let mut push_triple = |base: ExtIndex, mono: Slot, res: Slot, sign: Complex64| {
        let up = match base.shift(mono, 1) {
            Some(i) => i,
            None => return,
        };
        let side = match base.shift(res, 1) {
            Some(i) => i,
            None => return,
        };
        let member_ok = |i: &ExtIndex| known(i) || *i == omega;
        if member_ok(&up) && member_ok(&base) && member_ok(&side) {
            let t = [
                (up, Complex64::new(1.0, 0.0)),
                (base, sign),
                (side, Complex64::new(-1.0, 0.0)),
            ];
            if !triples.contains(&t) {
                triples.push(t);
            }
        }
    };
    for &(mono, res, sign) in &relations {
        // instances containing the candidate at each possible position
        for base in [
            omega.shift(mono, -1),
            Some(omega),
            omega.shift(res, -1),
        ]
        .into_iter()
        .flatten()
        {
            push_triple(base, mono, res, sign);
        }
        // fully constructed instances (observed by the candidate below)
        let bases: Vec<ExtIndex> = vis.keys().map(|i| **i).collect();
        for base in bases {
            push_triple(base, mono, res, sign);
        }
    }
    for t in &triples {
        let contains_omega = t.iter().any(|(i, _)| *i == omega);
        if contains_omega {
            // row per constructed observer: linear in the candidate
            for hobs in vis.values() {
                let mut row = CVec::zeros(ncols);
                let mut c = Complex64::new(0.0, 0.0);
                for (idx, coeff) in t {
                    if *idx == omega {
                        row += obs_row(hobs) * *coeff;
                    } else {
                        c += *coeff * ip(vis[idx], hobs);
                    }
                }
                rows.push(row);
                rhs.push(-c);
            }
        } else {
            // candidate as observer: conjugate the identity to stay linear
            let mut row = CVec::zeros(ncols);
            for (idx, coeff) in t {
                row += obs_row(vis[idx]) * coeff.conj();
            }
            rows.push(row);
            rhs.push(Complex64::new(0.0, 0.0));
        }
    }

    let nrows = rows.len();
    let mut amat = CMat::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        amat.row_mut(i).copy_from(&row.transpose());
    }
    StepSystem { amat, f: CVec::from_vec(rhs), layout }
}

/// Search configuration.
#[derive(Clone, Debug)]
pub struct AlgorithmConfig {
    /// Number of extension steps `R`.
    pub depth: usize,
    /// Beam width: states kept per step.
    pub beam_width: usize,
    /// Use the sign-pattern (modified) step variant.
    pub modified: bool,
    /// Measure whose extended moments steer the free-parameter sampling.
    pub guide: Option<AtomicMeasure>,
    /// Also steer by the measure recovered directly from the plain moments.
    pub self_guide: bool,
    /// Sample `d_r` on the {min, midpoint, bound} grid instead of only the
    /// minimal choice.
    pub d_grid: bool,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        AlgorithmConfig {
            depth: 5,
            beam_width: 16,
            modified: false,
            guide: None,
            self_guide: true,
            d_grid: true,
        }
    }
}

/// The coefficient vector (plain layout), norm, and full candidate vector of
/// the path induced by a known measure: the projection of the measure's
/// moment data onto the constructed family.
pub fn oracle_step_vector(
    ms: &ModelSpace,
    state: &StepState,
    r: usize,
    guide: &AtomicMeasure,
) -> (CVec, f64) {
    let omega = index_order(r);
    let visible = state.visible(ms);
    let n = visible.len();
    let mut hmat = CMat::zeros(ms.ambient, n);
    for (c, (_, v)) in visible.iter().enumerate() {
        hmat.set_column(c, v);
    }
    let g = CVec::from_fn(n, |j, _| {
        moment_of_measure_at(guide, &omega.pairing_sum(visible[j].0))
    });
    let gram = hmat.adjoint() * &hmat;
    let c = pinv(&gram, TOL_RANK) * g;
    let h_in = &hmat * c;
    let d = moment_of_measure_at(guide, &omega.pairing_sum(&omega)).re;
    // plain layout: alphas then betas 1..r-1
    let layout = layout_for(ms, r, None);
    let z = CVec::from_fn(layout.len(), |i, _| match layout[i] {
        Unknown::Alpha(nn) => ip(&h_in, &ms.ortho_basis[nn]),
        Unknown::Beta(j) => h_in[ms.h0_dim + j - 1],
    });
    (z, d)
}

/// Advances a state one step along the path induced by a known measure:
/// the projection coefficients, norm, and adjoined component are taken from
/// the measure's own moments. Returns `None` if the path conflicts with the
/// state's pairing values (which cannot happen when the state itself lies on
/// the path).
pub fn oracle_extend(
    ms: &ModelSpace,
    state: &StepState,
    r: usize,
    guide: &AtomicMeasure,
    s_scale: f64,
) -> Option<StepState> {
    let (z, d) = oracle_step_vector(ms, state, r, guide);
    let beta_rr = (d - z.norm_squared()).max(0.0).sqrt();
    extend_state(ms, state, r, &layout_for(ms, r, None), &z, d, beta_rr, s_scale)
}

fn restrict_layout(z_plain: &CVec, plain: &[Unknown], target: &[Unknown]) -> CVec {
    CVec::from_fn(target.len(), |i, _| {
        let pos = plain.iter().position(|u| *u == target[i]).unwrap();
        z_plain[pos]
    })
}

/// Extends `state` by one admissible choice of `h_{w(r)}`.
fn extend_state(
    ms: &ModelSpace,
    state: &StepState,
    r: usize,
    layout: &[Unknown],
    z: &CVec,
    d: f64,
    beta_rr: f64,
    s_scale: f64,
) -> Option<StepState> {
    let omega = index_order(r);
    let b = basis_matrix(ms, layout);
    let mut h_new = &b * z;
    h_new += ms.e_slot(r) * Complex64::new(beta_rr, 0.0);

    let mut next = state.clone();
    next.depth = r;
    let tol = TOL_CONFLICT * s_scale;
    let mut worst = 0.0f64;
    let mut record = |phi: &mut BTreeMap<ExtIndex, Complex64>, key: ExtIndex, val: Complex64| {
        match phi.get(&key) {
            Some(&old) => worst = worst.max((old - val).norm()),
            None => {
                phi.insert(key, val);
            }
        }
    };
    for (j, hj) in state.visible(ms) {
        record(&mut next.phi, omega.pairing_sum(j), ip(&h_new, hj));
        record(&mut next.phi, j.pairing_sum(&omega), ip(hj, &h_new));
    }
    record(&mut next.phi, omega.pairing_sum(&omega), Complex64::new(d, 0.0));
    if worst > tol {
        return None;
    }
    next.conflict = state.conflict.max(worst);
    next.h.insert(omega, h_new);
    next.d_values.push(d);
    next.sign_pattern.push(beta_rr > 1e-9 * s_scale.sqrt().max(1.0));
    Some(next)
}

fn candidate_vectors(
    ms: &ModelSpace,
    state: &StepState,
    r: usize,
    system: &StepSystem,
    guides: &[AtomicMeasure],
    s_scale: f64,
) -> Vec<CVec> {
    let set = parametric_gauss(&system.amat, &system.f, TOL_PIVOT);
    let sys_scale = 1.0 + max_abs(&system.amat) + max_abs_vec(&system.f);
    if !set.is_consistent(TOL_SYS * sys_scale) {
        return Vec::new();
    }
    let mut out: Vec<CVec> = vec![set.particular.clone()];
    if !set.null_basis.is_empty() {
        let mut nmat = CMat::zeros(set.n_vars, set.null_basis.len());
        for (c, v) in set.null_basis.iter().enumerate() {
            nmat.set_column(c, v);
        }
        let npinv = pinv(&nmat, TOL_PIVOT);
        let plain_layout = layout_for(ms, r, None);
        for g in guides {
            let (z_plain, _) = oracle_step_vector(ms, state, r, g);
            let zg = restrict_layout(&z_plain, &plain_layout, &system.layout);
            let coeff = &npinv * (&zg - &set.particular);
            out.push(&set.particular + &nmat * coeff);
        }
    }
    // keep only vectors that actually solve the system, deduplicated
    let mut kept: Vec<CVec> = Vec::new();
    for z in out {
        if system_residual(&system.amat, &z, &system.f) > TOL_SYS * sys_scale.max(s_scale) {
            continue;
        }
        if !kept.iter().any(|k| max_abs_vec(&(k - &z)) < 1e-10 * (1.0 + max_abs_vec(k))) {
            kept.push(z);
        }
    }
    kept
}

fn d_choices(
    state: &StepState,
    r: usize,
    z_norm_sq: f64,
    m_r: f64,
    guides: &[AtomicMeasure],
    d_grid: bool,
    s_scale: f64,
) -> Vec<f64> {
    let omega = index_order(r);
    let slack = 1e-9 * s_scale;
    if let Some(&pinned) = state.phi.get(&omega.pairing_sum(&omega)) {
        return vec![pinned.re];
    }
    let d_min = z_norm_sq;
    let mut ds = vec![d_min];
    if d_grid && m_r > d_min + slack {
        ds.push((d_min + m_r) / 2.0);
        ds.push(m_r);
    }
    for g in guides {
        ds.push(moment_of_measure_at(g, &omega.pairing_sum(&omega)).re);
    }
    ds.retain(|&d| d >= d_min - slack && d <= m_r + slack);
    ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ds.dedup_by(|a, b| (*a - *b).abs() <= slack);
    ds
}

/// One plain step: solve the assembled system, sample the affine freedom,
/// sweep `d_r`, and emit every admissible extension.
pub fn step_solve(
    ms: &ModelSpace,
    s: &MomentTable2D,
    state: &StepState,
    r: usize,
    cfg: &AlgorithmConfig,
    guides: &[AtomicMeasure],
) -> Result<Vec<StepState>, MomentError> {
    let omega = index_order(r);
    let m_r = compute_m_bound(s, &omega)?;
    let s_scale = 1.0 + s.max_abs();
    let system = assemble_step_system(ms, state, r, None);
    let mut out = Vec::new();
    for z in candidate_vectors(ms, state, r, &system, guides, s_scale) {
        let z_norm_sq = z.norm_squared();
        for d in d_choices(state, r, z_norm_sq, m_r, guides, cfg.d_grid, s_scale) {
            if z_norm_sq > d + 1e-9 * s_scale || d > m_r + 1e-9 * s_scale {
                continue;
            }
            let beta_rr = (d - z_norm_sq).max(0.0).sqrt();
            if let Some(next) =
                extend_state(ms, state, r, &system.layout, &z, d, beta_rr, s_scale)
            {
                out.push(next);
            }
        }
    }
    Ok(out)
}

/// One modified step: the adjoined-direction unknowns are restricted to the
/// state's positive sign pattern, and each solution is branched into the
/// zero and positive `e_r`-component children.
pub fn step_solve_modified(
    ms: &ModelSpace,
    s: &MomentTable2D,
    state: &StepState,
    r: usize,
    cfg: &AlgorithmConfig,
    guides: &[AtomicMeasure],
) -> Result<Vec<StepState>, MomentError> {
    let omega = index_order(r);
    let m_r = compute_m_bound(s, &omega)?;
    let s_scale = 1.0 + s.max_abs();
    let pattern = state.sign_pattern.clone();
    let system = assemble_step_system(ms, state, r, Some(&pattern));
    let mut out = Vec::new();
    let pos_tol = 1e-9 * s_scale.sqrt().max(1.0);
    for z in candidate_vectors(ms, state, r, &system, guides, s_scale) {
        let z_norm_sq = z.norm_squared();
        for d in d_choices(state, r, z_norm_sq, m_r, guides, cfg.d_grid, s_scale) {
            if z_norm_sq > d + 1e-9 * s_scale || d > m_r + 1e-9 * s_scale {
                continue;
            }
            let beta_rr = (d - z_norm_sq).max(0.0).sqrt();
            if beta_rr > pos_tol {
                // s_r = 1 branch
                if let Some(next) =
                    extend_state(ms, state, r, &system.layout, &z, d, beta_rr, s_scale)
                {
                    out.push(next);
                }
            } else {
                // s_r = 0 branch: the component vanishes, d collapses to the
                // squared coefficient norm
                if let Some(next) =
                    extend_state(ms, state, r, &system.layout, &z, z_norm_sq, 0.0, s_scale)
                {
                    out.push(next);
                }
            }
        }
    }
    Ok(out)
}

/// A depth-R candidate: the extended moment table induced by the state's
/// pairing function, and the measure recovered from it.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub u: ExtMomentTable,
    pub outcome: SolveOutcome,
}

/// Overall verdict of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// At least one candidate extension produced a measure reproducing the
    /// input moments.
    Candidates,
    /// A necessary condition failed; the problem has no solution.
    NoSolution,
    /// No candidate survived at this depth and width; not a disproof.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub verdict: Verdict,
    pub candidates: Vec<Candidate>,
    pub step0: Option<Step0Report>,
}

/// The extended moment table induced by a state's pairing function.
pub fn state_to_table(state: &StepState) -> ExtMomentTable {
    let mut m_max = 0;
    let mut n_max = 0;
    let mut k_abs = 0;
    for i in state.phi.keys() {
        m_max = m_max.max(i.m);
        n_max = n_max.max(i.n);
        k_abs = k_abs.max(i.k.abs()).max(i.l.abs()).max(i.r.abs()).max(i.t.abs());
    }
    let mut u = ExtMomentTable::new(BoxSpec::new(m_max, n_max, k_abs));
    u.entries = state.phi.clone();
    u
}

/// Monomial family for the final measure extraction: total degree bounded so
/// that pairings against variable-shifted members stay within the data.
fn extraction_family(degree: i32) -> Vec<ExtIndex> {
    let p = ((degree - 1) / 2).max(0);
    let mut fam = Vec::new();
    for m in 0..=p {
        for n in 0..=(p - m) {
            fam.push(ExtIndex::monomial(m, n));
        }
    }
    fam.sort();
    fam
}

/// The measure recovered directly from the plain moments (no extension
/// freedom exercised): the monomial moment table solved as a degenerate
/// extended problem.
pub fn principal_measure(s: &MomentTable2D) -> Result<SolveOutcome, StageFailure> {
    let mut u = ExtMomentTable::new(BoxSpec::new(s.degree, s.degree, 0));
    for (&(m, n), &v) in &s.entries {
        u.entries.insert(ExtIndex::monomial(m, n), v);
    }
    solve_with_family(&u, &extraction_family(s.degree))
}

/// Breadth-limited search over the extension steps, finishing each surviving
/// state into a candidate table and measure.
pub fn run_algorithm(s: &MomentTable2D, cfg: &AlgorithmConfig) -> RunResult {
    let s_scale = 1.0 + s.max_abs();
    let deg_model = s.degree / 2;
    let ms = match build_model_space(s, deg_model, cfg.depth) {
        Ok(ms) => ms,
        Err(_) => {
            return RunResult { verdict: Verdict::NoSolution, candidates: Vec::new(), step0: None }
        }
    };
    let step0 = match step0_check(&ms, s) {
        Ok(rep) => rep,
        Err(_) => {
            return RunResult { verdict: Verdict::NoSolution, candidates: Vec::new(), step0: None }
        }
    };
    if !step0.passed {
        return RunResult {
            verdict: Verdict::NoSolution,
            candidates: Vec::new(),
            step0: Some(step0),
        };
    }

    let mut guides: Vec<AtomicMeasure> = Vec::new();
    if let Some(g) = &cfg.guide {
        guides.push(g.clone());
    }
    if cfg.self_guide {
        if let Ok(out) = principal_measure(s) {
            guides.push(out.measure);
        }
    }

    let mut beam = vec![StepState::initial(&ms, s)];
    for r in 1..=cfg.depth {
        let mut next = Vec::new();
        for state in &beam {
            let children = if cfg.modified {
                step_solve_modified(&ms, s, state, r, cfg, &guides)
            } else {
                step_solve(&ms, s, state, r, cfg, &guides)
            };
            match children {
                Ok(mut c) => next.append(&mut c),
                Err(_) => continue,
            }
        }
        // deterministic beam pruning: smallest accumulated conflict first,
        // ties broken by the d-value history
        next.sort_by(|a, b| {
            a.conflict
                .partial_cmp(&b.conflict)
                .unwrap()
                .then_with(|| a.d_values.partial_cmp(&b.d_values).unwrap())
        });
        next.truncate(cfg.beam_width);
        beam = next;
        if beam.is_empty() {
            break;
        }
    }

    let family = extraction_family(s.degree);
    let mut candidates: Vec<Candidate> = Vec::new();
    for state in &beam {
        let u = state_to_table(state);
        // positivity of the candidate pairing kernel over the full family
        let full_family: Vec<ExtIndex> = state.h.keys().copied().collect();
        let gram = match build_gram_for_family(&u, &full_family) {
            Ok(g) => g,
            Err(_) => continue,
        };
        match psd_check(&gram, TOL_PSD) {
            Ok(rep) if rep.is_psd => {}
            _ => continue,
        }
        let outcome = match solve_with_family(&u, &family) {
            Ok(o) => o,
            Err(_) => continue,
        };
        // soundness: the measure must reproduce the prescribed moments
        let mut worst = 0.0f64;
        for (&(m, n), &v) in &s.entries {
            let got = moment_of_measure_at(&outcome.measure, &ExtIndex::monomial(m, n));
            worst = worst.max((got - v).norm());
        }
        if worst > TOL_REPRO * s_scale {
            continue;
        }
        let duplicate = candidates
            .iter()
            .any(|c| matching_distance(&c.outcome.measure, &outcome.measure) < 1e-8);
        if !duplicate {
            candidates.push(Candidate { u, outcome });
        }
    }

    let verdict = if candidates.is_empty() { Verdict::Inconclusive } else { Verdict::Candidates };
    RunResult { verdict, candidates, step0: Some(step0) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::real_moments_of_measure;
    use approx::assert_abs_diff_eq;

    fn delta12() -> MomentTable2D {
        real_moments_of_measure(&AtomicMeasure::new([(1.0, 2.0, 3.0)]), 4)
    }

    #[test]
    fn model_space_ranks() {
        let s0 = real_moments_of_measure(&AtomicMeasure::new([(0.0, 0.0, 1.0)]), 2);
        let ms0 = build_model_space(&s0, 1, 2).unwrap();
        assert_eq!(ms0.h0_dim, 1);

        let ms1 = build_model_space(&delta12(), 1, 2).unwrap();
        assert_eq!(ms1.h0_dim, 1);

        let s2 = real_moments_of_measure(
            &AtomicMeasure::new([(0.0, 0.0, 1.0), (1.0, 1.0, 1.0)]),
            2,
        );
        let ms2 = build_model_space(&s2, 1, 2).unwrap();
        assert_eq!(ms2.h0_dim, 2);
    }

    #[test]
    fn m_bound_examples() {
        let s = delta12();
        // (x1^2 + 1) at delta(1,2) w=3: s20 + s00 = 3 + 3
        let m = compute_m_bound(&s, &ExtIndex::new(0, 1, 0, 0, 0, 0)).unwrap();
        assert_abs_diff_eq!(m, 6.0, epsilon = 1e-12);
        // negative exponent clamps to the mass
        let m = compute_m_bound(&s, &ExtIndex::new(0, -1, 0, 0, 0, 0)).unwrap();
        assert_abs_diff_eq!(m, 3.0, epsilon = 1e-12);
        // pure monomial index: the even moment itself
        let m = compute_m_bound(&s, &ExtIndex::monomial(1, 1)).unwrap();
        assert_abs_diff_eq!(m, 3.0 * 1.0 * 4.0, epsilon = 1e-12);
    }

    #[test]
    fn step0_passes_oracle_and_rejects_negative_mass() {
        let s = delta12();
        let ms = build_model_space(&s, 2, 1).unwrap();
        let rep = step0_check(&ms, &s).unwrap();
        assert!(rep.passed, "pairing residual {}", rep.pairing_residual);

        let mut bad = MomentTable2D::new(2);
        for m in 0..=2 {
            for n in 0..=2 {
                bad.entries.insert((m, n), Complex64::new(0.0, 0.0));
            }
        }
        bad.entries.insert((0, 0), Complex64::new(-1.0, 0.0));
        assert!(matches!(
            build_model_space(&bad, 1, 1),
            Err(MomentError::NotPsd { .. })
        ));
    }

    #[test]
    fn positive_resolvent_direction_is_pinned() {
        // w(5) = (0,0,0;0,0,1) corresponds to multiplication by (x2 - i),
        // a polynomial: the step system must pin it completely.
        let mu = AtomicMeasure::new([(0.5, -1.0, 1.0), (2.0, 1.5, 2.0)]);
        let s = real_moments_of_measure(&mu, 4);
        let ms = build_model_space(&s, 2, 5).unwrap();
        let mut state = StepState::initial(&ms, &s);
        // walk steps 1..=4 with the oracle guide so the state stays on-path
        let cfg = AlgorithmConfig { self_guide: false, ..Default::default() };
        let guides = [mu.clone()];
        for r in 1..=4 {
            let states = step_solve(&ms, &s, &state, r, &cfg, &guides).unwrap();
            // prefer the child closest to the oracle pairing values
            state = states
                .into_iter()
                .min_by(|a, b| {
                    let score = |st: &StepState| {
                        let omega = index_order(st.depth);
                        st.phi
                            .iter()
                            .filter(|(k, _)| **k == omega.pairing_sum(&ExtIndex::zero()))
                            .map(|(k, v)| (v - moment_of_measure_at(&mu, k)).norm())
                            .fold(0.0f64, f64::max)
                    };
                    score(a).partial_cmp(&score(b)).unwrap()
                })
                .unwrap();
        }
        let system = assemble_step_system(&ms, &state, 5, None);
        let set = parametric_gauss(&system.amat, &system.f, TOL_PIVOT);
        // the kernel-block coefficients carry no freedom: any remaining null
        // directions live purely in the adjoined slots
        for v in &set.null_basis {
            for (c, u) in system.layout.iter().enumerate() {
                if matches!(u, Unknown::Alpha(_)) {
                    assert!(v[c].norm() < 1e-8, "alpha component free in null basis");
                }
            }
        }
        // the pinned kernel part matches h_{(0,0,0;0,0,1)} = h_{0,1} - i h_{0,0}
        let b = basis_matrix(&ms, &system.layout);
        let h = &b * &set.particular;
        let expect = &ms.h0_coords[&(0, 1)]
            - &ms.h0_coords[&(0, 0)] * Complex64::new(0.0, 1.0);
        let diff = h.rows(0, ms.h0_dim) - expect.rows(0, ms.h0_dim);
        assert!(max_abs_vec(&diff.into_owned()) < 1e-8);
    }

    #[test]
    fn oracle_path_survives_step_systems() {
        let mu = AtomicMeasure::new([(0.5, -1.0, 1.0), (2.0, 1.5, 2.0)]);
        let s = real_moments_of_measure(&mu, 4);
        let ms = build_model_space(&s, 2, 5).unwrap();
        let mut state = StepState::initial(&ms, &s);
        let s_scale = 1.0 + s.max_abs();
        for r in 1..=5 {
            let omega = index_order(r);
            let (z, d) = oracle_step_vector(&ms, &state, r, &mu);
            let system = assemble_step_system(&ms, &state, r, None);
            let res = system_residual(&system.amat, &z, &system.f);
            assert!(res <= 1e-8 * s_scale, "step {r} residual {res}");
            let m_r = compute_m_bound(&s, &omega).unwrap();
            assert!(z.norm_squared() <= d + 1e-9 * s_scale);
            assert!(d <= m_r + 1e-9 * s_scale, "step {r}: d {d} exceeds M {m_r}");
            let beta_rr = (d - z.norm_squared()).max(0.0).sqrt();
            state = extend_state(&ms, &state, r, &layout_for(&ms, r, None), &z, d, beta_rr, s_scale)
                .expect("oracle extension must not conflict");
        }
        // the oracle path's pairing values reproduce the oracle moments
        for (k, v) in &state.phi {
            let want = moment_of_measure_at(&mu, k);
            assert!((v - want).norm() <= 1e-8 * s_scale, "phi mismatch at {k:?}");
        }
    }

    #[test]
    fn run_recovers_two_atom_measure_with_guide() {
        let mu = AtomicMeasure::new([(0.5, -1.0, 1.0), (2.0, 1.5, 2.0)]);
        let s = real_moments_of_measure(&mu, 5);
        let cfg = AlgorithmConfig { depth: 3, guide: Some(mu.clone()), ..Default::default() };
        let result = run_algorithm(&s, &cfg);
        assert_eq!(result.verdict, Verdict::Candidates);
        let best = result
            .candidates
            .iter()
            .map(|c| matching_distance(&mu, &c.outcome.measure))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6, "best matching distance {best}");
    }

    #[test]
    fn run_without_guide_emits_principal_candidate() {
        let mu = AtomicMeasure::new([(1.0, 2.0, 3.0)]);
        let s = real_moments_of_measure(&mu, 4);
        let result = run_algorithm(&s, &AlgorithmConfig { depth: 2, ..Default::default() });
        assert_eq!(result.verdict, Verdict::Candidates);
        let best = result
            .candidates
            .iter()
            .map(|c| matching_distance(&mu, &c.outcome.measure))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6);
        // the candidate's resolvent entry matches the measure
        let c = &result.candidates[0];
        let w1 = ExtIndex::new(0, -1, 0, 0, 0, 0);
        if let Ok(v) = c.u.get(&ExtIndex::zero().pairing_sum(&w1)) {
            let want = moment_of_measure_at(&mu, &ExtIndex::new(0, 0, -1, 0, 0, 0));
            assert!((v - want).norm() < 1e-6);
        }
    }

    #[test]
    fn negative_mass_yields_no_solution_verdict() {
        let mut bad = MomentTable2D::new(2);
        for m in 0..=2 {
            for n in 0..=2 {
                bad.entries.insert((m, n), Complex64::new(0.0, 0.0));
            }
        }
        bad.entries.insert((0, 0), Complex64::new(-1.0, 0.0));
        let result = run_algorithm(&bad, &AlgorithmConfig::default());
        assert_eq!(result.verdict, Verdict::NoSolution);
    }

    #[test]
    fn modified_branches_union_matches_plain() {
        let mu = AtomicMeasure::new([(0.5, -1.0, 1.0), (2.0, 1.5, 2.0)]);
        let s = real_moments_of_measure(&mu, 4);
        let ms = build_model_space(&s, 2, 3).unwrap();
        let cfg = AlgorithmConfig { self_guide: false, ..Default::default() };
        let guides = [mu.clone()];
        let state = StepState::initial(&ms, &s);
        let plain = step_solve(&ms, &s, &state, 1, &cfg, &guides).unwrap();
        let modified = step_solve_modified(&ms, &s, &state, 1, &cfg, &guides).unwrap();
        assert_eq!(plain.len(), modified.len());
        for p in &plain {
            let hp = &p.h[&index_order(1)];
            let found = modified
                .iter()
                .any(|m| max_abs_vec(&(&m.h[&index_order(1)] - hp)) < 1e-9);
            assert!(found, "plain G_1 element missing from modified union");
        }
    }
}
