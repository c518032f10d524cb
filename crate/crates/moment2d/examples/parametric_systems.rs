//! Solve an underdetermined linear system parametrically: particular
//! solution, free variables, null-space basis, and sampling with chosen
//! free-variable values.
//!
//! Run with: `cargo run --example parametric_systems`

use std::collections::BTreeMap;

use moment2d::linalg::{CMat, CVec};
use moment2d::linsolve::{affine_sample, parametric_gauss, residual, TOL_PIVOT};
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn main() {
    // x + y + z = 3, x - y = 1: a one-parameter family of solutions.
    let a = CMat::from_row_slice(2, 3, &[c(1.0), c(1.0), c(1.0), c(1.0), c(-1.0), c(0.0)]);
    let f = CVec::from_vec(vec![c(3.0), c(1.0)]);

    let set = parametric_gauss(&a, &f, TOL_PIVOT);
    println!("pivot columns: {:?}", set.pivot_cols);
    println!("free columns:  {:?}", set.free_cols());
    println!("particular:    {:?}", set.particular.iter().map(|v| v.re).collect::<Vec<_>>());
    println!(
        "null basis:    {:?}",
        set.null_basis
            .iter()
            .map(|v| v.iter().map(|x| x.re).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    );

    // Pick the free variable z = 1 and check the sampled point solves the
    // system.
    let z_col = set.free_cols()[0];
    let mut assignment = BTreeMap::new();
    assignment.insert(z_col, c(1.0));
    let x = affine_sample(&set, &assignment, 1e-9).unwrap();
    println!("sample at z=1: {:?}", x.iter().map(|v| v.re).collect::<Vec<_>>());
    println!("residual:      {:.3e}", residual(&a, &x, &f));
    assert!(residual(&a, &x, &f) < 1e-12);

    // An inconsistent system reports its contradiction instead of a solution.
    let f_bad = CVec::from_vec(vec![c(3.0), c(1.0)]);
    let a_bad = CMat::from_row_slice(2, 3, &[c(1.0), c(1.0), c(1.0), c(1.0), c(1.0), c(1.0)]);
    let set_bad = parametric_gauss(&a_bad, &f_bad, TOL_PIVOT);
    println!(
        "inconsistent system: consistency residual {:.3e}",
        set_bad.max_consistency_residual()
    );
    assert!(!set_bad.is_consistent(1e-9));
}
