//! Multipole coefficients of analytic fields and of a solved field.

use igakit::geometry::bundled;
use igakit::postprocess::{multipole_coeffs, quadrupole_gradient, FieldSampler, Quantity};
use igakit::solve::{solve_poisson, BoundaryCondition};
use igakit::spaces::couple_scalar_multipatch;

fn main() -> igakit::Result<()> {
    let g = 3.0;
    let r0 = 0.2;
    let quad = multipole_coeffs(|x| Ok([g * x[1], g * x[0]]), [0.0, 0.0], r0, 6)?;
    println!("quadrupole field B = g (y, x), g = {g}, r0 = {r0}");
    for n in 1..=6 {
        println!("  B_{n} = {:+.3e}", quad.get(n).unwrap_or_default());
    }
    println!("  gradient = {}", quadrupole_gradient(&quad)?);

    // flux lines of -lap(A) = 1 on the disc circle around the origin
    let mp = bundled("disc").expect("bundled geometry");
    let space = couple_scalar_multipatch(&mp, &[3], &[4])?;
    let sol = solve_poisson(&mp, &space, &[1.0.into()], &[1.0.into()], &BoundaryCondition::homogeneous(&mp))?;
    let sampler = FieldSampler::new(&sol)?;
    let solved = multipole_coeffs(
        |x| {
            let b = sampler.sample(&x, Quantity::Curl)?;
            Ok([b[0], b[1]])
        },
        [0.0, 0.0],
        0.5,
        4,
    )?;
    println!("rotationally symmetric field, all B_n near zero: {:?}", solved.normal);
    Ok(())
}
