//! Certify positivity of an extended moment kernel, and watch the
//! certificate catch a perturbed table.
//!
//! Run with: `cargo run --example certify_positivity`

use moment2d::gram::{build_gram_extended, psd_check, TOL_PSD};
use moment2d::table::moments_of_measure;
use moment2d::{AtomicMeasure, BoxSpec, ExtIndex};
use num_complex::Complex64;

fn main() {
    let mu = AtomicMeasure::new([(1.0, 2.0, 3.0), (-0.5, 0.25, 1.5), (2.0, -1.0, 0.4)]);
    let u = moments_of_measure(&mu, &BoxSpec::new(4, 4, 2));

    // The Gram matrix over the sub-box (0,0,1) pairs 9 resolvent-type
    // functions; its positivity certifies that the data is moment data.
    let gram = build_gram_extended(&u, &BoxSpec::new(0, 0, 1)).unwrap();
    let report = psd_check(&gram, TOL_PSD).unwrap();
    println!(
        "oracle kernel: dim {}, min eigenvalue {:.3e}, rank {}, PSD: {}",
        gram.dim(),
        report.min_eig,
        report.rank,
        report.is_psd
    );
    assert!(report.is_psd);

    // Perturb one entry: the kernel stops being positive semidefinite.
    let mut broken = u.clone();
    let idx = ExtIndex::new(0, 1, 1, 0, 0, 0);
    let v = broken.entries[&idx];
    broken.entries.insert(idx, v - Complex64::new(25.0, 0.0));
    let gram = build_gram_extended(&broken, &BoxSpec::new(0, 0, 1)).unwrap();
    let report = psd_check(&gram, TOL_PSD).unwrap();
    println!(
        "perturbed kernel: min eigenvalue {:.3e}, PSD: {}",
        report.min_eig, report.is_psd
    );
    assert!(!report.is_psd);
}
