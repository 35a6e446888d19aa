//! Moves one control point of the disc boundary to lower the TM eigenvalue.

use igakit::geometry::bundled;
use igakit::optimize::objectives::tm_eigenvalue;
use igakit::optimize::{minimize_bounded, Axis, DesignVector, MinimizeOptions, ShapeObjective};

fn main() -> igakit::Result<()> {
    let mp = bundled("disc").expect("bundled geometry");
    // middle control point of the east arc
    let design = DesignVector::new(&mp, &[(1, 3, Axis::Coord(0), -0.2, 0.2)])?;
    let bounds = design.bounds();
    let objective = ShapeObjective::new(design.clone(), tm_eigenvalue(vec![2], vec![4]));
    let m = minimize_bounded(&objective, &[0.0], &bounds, &MinimizeOptions::default())?;
    for (x, f) in &m.trace {
        println!("dx = {:+.4}  lambda = {f:.8}", x[0]);
    }
    println!("stopped after {} iterations: {:?}", m.iterations, m.termination);
    let optimized = design.apply(&m.x)?;
    println!("moved point: {:?}", optimized.patches()[1].point(3));
    Ok(())
}
