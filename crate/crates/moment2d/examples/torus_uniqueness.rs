//! Uniqueness check: push the recovered measure to the two-torus through the
//! Cayley angle map and compare its trigonometric moments against the
//! extended moment data.
//!
//! Run with: `cargo run --example torus_uniqueness`

use moment2d::extended::{solve_extended, torus_transform, trig_moment};
use moment2d::table::moments_of_measure;
use moment2d::{AtomicMeasure, BoxSpec, ExtIndex};

fn main() {
    let mu = AtomicMeasure::new([(1.0, 2.0, 3.0), (-0.5, 0.25, 1.5)]);
    let u = moments_of_measure(&mu, &BoxSpec::new(4, 4, 3));
    let outcome = solve_extended(&u).unwrap();

    let torus = torus_transform(&outcome.measure);
    println!("torus atoms (phi, psi, w):");
    for (phi, psi, w) in &torus {
        println!("  ({phi:.12}, {psi:.12}) weight {w:.12}");
    }

    // The trig moment of order (k, l) equals the extended moment at
    // (0, k, -k; 0, l, -l): matching them across a window of orders pins the
    // measure among all solutions.
    let mut worst = 0.0f64;
    for k in -3..=3 {
        for l in -3..=3 {
            let lhs = trig_moment(&torus, k, l);
            let rhs = u.get(&ExtIndex::new(0, k, -k, 0, l, -l)).unwrap();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    println!("largest trig-moment mismatch over |k|,|l| <= 3: {worst:.3e}");
    assert!(worst < 1e-8);
}
