//! TM modes of a circular pill-box cavity on the exact NURBS disc.
//!
//! The lowest eigenvalue is the squared first zero of J0.

use igakit::geometry::bundled;
use igakit::solve::{maxwell_eigs_2d, EigenOptions, Formulation, PhysicalConstants};

const J01_SQUARED: f64 = 5.783185962946784;

fn main() -> igakit::Result<()> {
    let mp = bundled("disc").expect("bundled geometry");
    for refine in [2, 4, 8, 16] {
        let modes = maxwell_eigs_2d(&mp, Formulation::Tm2d, &[3], &[refine], 1, &EigenOptions::default())?;
        let l = modes.result.eigenvalues[0];
        println!("refine {refine:2}: lambda = {l:.12}  relative error {:.2e}", (l / J01_SQUARED - 1.0).abs());
    }
    // a pill-box of 0.1 m radius
    let modes = maxwell_eigs_2d(&mp, Formulation::Tm2d, &[3], &[8], 4, &EigenOptions::default())?;
    let result = modes.result.with_frequencies(&PhysicalConstants::default(), 0.1)?;
    for (l, f) in result.eigenvalues.iter().zip(result.frequencies.as_deref().unwrap_or_default()) {
        println!("lambda {l:10.6}  f = {:.6} GHz", f / 1e9);
    }
    Ok(())
}
