//! Recover an atomic measure from its extended moment table and compare it
//! against the generating measure.
//!
//! Run with: `cargo run --example recover_measure`

use moment2d::extended::solve_extended;
use moment2d::measure::matching_distance;
use moment2d::table::moments_of_measure;
use moment2d::{AtomicMeasure, BoxSpec};

fn main() {
    let mu = AtomicMeasure::new([
        (1.0, 2.0, 3.0),
        (-0.5, 0.25, 1.5),
        (2.0, -1.0, 0.4),
        (0.1, 1.1, 0.9),
    ]);
    let u = moments_of_measure(&mu, &BoxSpec::new(7, 7, 2));

    let outcome = solve_extended(&u).expect("oracle data must solve");
    println!("gates:");
    println!("  psd min eigenvalue  {:.3e}", outcome.report.psd.min_eig);
    println!("  kernel rank         {}", outcome.report.gns_dim);
    println!("  recurrence residual {:.3e}", outcome.report.recurrence_residual);
    println!("  symmetry residual   {:.3e}", outcome.report.sym_residual);
    println!("  commutator residual {:.3e}", outcome.report.comm_residual);
    println!("  reconstruction      {:.3e}", outcome.report.recon_residual);

    println!("recovered atoms:");
    for a in outcome.measure.atoms() {
        println!("  ({:+.12}, {:+.12}) weight {:.12}", a.x1, a.x2, a.w);
    }
    let dist = matching_distance(&mu, &outcome.measure);
    println!("matching distance to the generating measure: {dist:.3e}");
    assert!(dist < 1e-7);
}
