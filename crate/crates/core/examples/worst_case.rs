//! Linearized and direct worst-case deviation under control-point tolerances.

use igakit::geometry::bundled;
use igakit::optimize::objectives::tm_eigenvalue;
use igakit::optimize::{worst_case_direct, worst_case_linear, Axis, DesignVector, ShapeObjective};

fn main() -> igakit::Result<()> {
    let mp = bundled("disc").expect("bundled geometry");
    let design = DesignVector::new(&mp, &[(1, 3, Axis::Coord(0), -0.1, 0.1), (1, 3, Axis::Coord(1), -0.1, 0.1)])?;
    let objective = ShapeObjective::new(design, tm_eigenvalue(vec![2], vec![4]));
    for s in [0.01, 0.02, 0.05] {
        let lin = worst_case_linear(&objective, &[0.0, 0.0], s)?;
        let direct = worst_case_direct(&objective, &[0.0, 0.0], s, 0)?;
        println!("s = {s:.2}: linear {lin:.6e}  direct {:.6e}  at {:?}", direct.value, direct.argmax);
    }
    Ok(())
}
