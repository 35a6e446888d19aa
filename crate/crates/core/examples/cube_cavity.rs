//! Lowest modes of the unit cube cavity with PEC walls.

use igakit::geometry::bundled;
use igakit::solve::{maxwell_eigs_3d, EigenOptions};

fn main() -> igakit::Result<()> {
    let mp = bundled("cube").expect("bundled geometry");
    let modes = maxwell_eigs_3d(&mp, &[2], &[4], 4, &EigenOptions::default())?;
    let pi2 = std::f64::consts::PI.powi(2);
    println!("kernel dimension: {}", modes.result.kernel_count);
    for l in &modes.result.eigenvalues {
        println!("lambda/pi^2 = {:.6}", l / pi2);
    }
    Ok(())
}
