//! Discrete derivatives between the spline spaces compose to zero exactly.

use igakit::geometry::bundled;
use igakit::spaces::{discrete_diff, make_refined_space};

fn main() -> igakit::Result<()> {
    for name in ["square", "disc", "cube"] {
        let mp = bundled(name).expect("bundled geometry");
        let patch = &mp.patches()[0];
        let v0 = make_refined_space(patch, 0, &[3], &[3])?;
        let (v1, grad) = discrete_diff(&v0)?;
        let (v2, curl) = discrete_diff(&v1)?;
        let cg = curl.matmul(&grad)?;
        print!("{name}: dims {} -> {} -> {}", v0.dof_count(), v1.dof_count(), v2.dof_count());
        print!("  max|curl grad| = {:.1e}", cg.max_abs());
        if v2.kind() < mp.param_dim() {
            let (v3, div) = discrete_diff(&v2)?;
            print!(" -> {}  max|div curl| = {:.1e}", v3.dof_count(), div.matmul(&curl)?.max_abs());
        }
        println!();
    }
    Ok(())
}
