//! Build the commuting multiplication-operator pair on the kernel
//! realization, take its Cayley transforms, and verify the resolvent and
//! cyclic-factorization identities.
//!
//! Run with: `cargo run --example operator_pair`

use moment2d::extended::{
    build_operators, cayley, cyclic_factorization_residual, default_solve_family,
    joint_spectral_measure, resolvent_residual,
};
use moment2d::gram::{build_gram_for_family, gns_construct, TOL_RANK};
use moment2d::table::moments_of_measure;
use moment2d::{AtomicMeasure, BoxSpec};

fn main() {
    let mu = AtomicMeasure::new([(1.0, 2.0, 3.0), (-0.5, 0.25, 1.5)]);
    let box_spec = BoxSpec::new(4, 4, 3);
    let u = moments_of_measure(&mu, &box_spec);

    let family = default_solve_family(&box_spec);
    let gram = build_gram_for_family(&u, &family).unwrap();
    let gns = gns_construct(&gram, TOL_RANK).unwrap();
    println!("kernel realization: dim {}", gns.dim);

    let pair = build_operators(&gns, &u).unwrap();
    println!("symmetry residual   {:.3e}", pair.sym_residual);
    println!("commutator residual {:.3e}", pair.comm_residual);

    let cay = cayley(&pair).unwrap();
    println!("cayley unitarity    {:.3e}", cay.unitarity_residual);
    println!("cayley commutator   {:.3e}", cay.comm_residual);

    // Identities over a small index box: applying (A -/+ iI) and (B -/+ iI)
    // walks the resolvent exponents, and every coordinate factors through
    // operator powers applied to the cyclic vector.
    let check_box = BoxSpec::new(1, 1, 1);
    let res = resolvent_residual(&gns, &pair, &u, &check_box).unwrap();
    let cyc = cyclic_factorization_residual(&gns, &pair, &u, &check_box).unwrap();
    println!("resolvent identities {res:.3e}");
    println!("cyclic factorization {cyc:.3e}");
    assert!(res < 1e-8 && cyc < 1e-7);

    let measure = joint_spectral_measure(&pair).unwrap();
    println!("spectral atoms:");
    for a in measure.atoms() {
        println!("  ({:+.12}, {:+.12}) weight {:.12}", a.x1, a.x2, a.w);
    }
}
