//! TE modes of the unit square with curl-conforming splines.
//!
//! The gradient kernel shows up as eigenvalue zero and is reported apart
//! from the physical spectrum {1, 1, 2, 4, 4, 5, 5, 8} pi^2.

use igakit::geometry::bundled;
use igakit::solve::{maxwell_eigs_2d, EigenOptions, Formulation};

fn main() -> igakit::Result<()> {
    let mp = bundled("square").expect("bundled geometry");
    let modes = maxwell_eigs_2d(&mp, Formulation::Te2d, &[2], &[16], 8, &EigenOptions::default())?;
    let pi2 = std::f64::consts::PI.powi(2);
    println!("kernel dimension: {}", modes.result.kernel_count);
    for (l, r) in modes.result.eigenvalues.iter().zip(&modes.result.residuals) {
        println!("lambda/pi^2 = {:.8}  residual {r:.1e}", l / pi2);
    }
    Ok(())
}
