//! -div(nu grad u) = 1 on the unit disc with u = 0 on the circle.
//!
//! The exact solution is (1 - r^2)/4.

use igakit::geometry::bundled;
use igakit::postprocess::{l2_error, FieldSampler, Quantity};
use igakit::solve::{solve_poisson, BoundaryCondition};
use igakit::spaces::couple_scalar_multipatch;

fn main() -> igakit::Result<()> {
    let mp = bundled("disc").expect("bundled geometry");
    for refine in [2, 4, 8] {
        let space = couple_scalar_multipatch(&mp, &[3], &[refine])?;
        let bc = BoundaryCondition::homogeneous(&mp);
        let sol = solve_poisson(&mp, &space, &[1.0.into()], &[1.0.into()], &bc)?;
        let err = l2_error(&sol, |x| (1.0 - x[0] * x[0] - x[1] * x[1]) / 4.0)?;
        let sampler = FieldSampler::new(&sol)?;
        let centre = sampler.sample(&[0.0, 0.0], Quantity::Value)?[0];
        let b = sampler.sample(&[0.5, 0.0], Quantity::Curl)?;
        println!(
            "refine {refine:2}: dofs {:5}  u(0) = {centre:.12}  L2 error {err:.3e}  B(0.5, 0) = ({:.6}, {:.6})",
            space.dof_count(),
            b[0],
            b[1]
        );
    }
    Ok(())
}
