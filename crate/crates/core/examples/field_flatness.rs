//! Field-quality measures: flatness of cell peaks and gradient homogeneity.

use igakit::optimize::goal_stern_gerlach;
use igakit::postprocess::{field_flatness, gradient_metrics, Rect};

fn main() -> igakit::Result<()> {
    for peaks in [vec![1.0, 1.0, 1.0, 1.0], vec![0.95, 1.02, 1.05, 0.98, 1.0]] {
        let (eta1, eta2) = field_flatness(&peaks)?;
        println!("peaks {peaks:?}: eta1 = {eta1:.6}  eta2 = {eta2:.6}");
    }
    let region = Rect { x: [1.0, 2.0], y: [-0.5, 0.5] };
    // |B| = x^2 has tau = 2x, so tau_av = 3 and eps = 1/sqrt(27)
    let m = gradient_metrics(|x| Ok(x[0] * x[0]), region, 8)?;
    println!("tau_av = {:.6}  eps = {:.6}", m.tau_av, m.eps);
    println!("goal = {:.6}", goal_stern_gerlach(m.tau_av, m.eps, 1.0)?);
    Ok(())
}
