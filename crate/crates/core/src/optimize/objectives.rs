//! Ready-made geometry quantities for shape objectives.

use crate::assembly::{load_multipatch, Coefficient};
use crate::error::{Error, Result};
use crate::geometry::MultiPatch;
use crate::solve::{maxwell_eigs_2d, solve_poisson, BoundaryCondition, EigenOptions, Formulation};
use crate::spaces::couple_scalar_multipatch;

/// Lowest TM cavity eigenvalue of a planar geometry.
pub fn tm_eigenvalue(degrees: Vec<usize>, refine: Vec<usize>) -> impl Fn(&MultiPatch) -> Result<f64> + Sync {
    move |mp: &MultiPatch| {
        let modes = maxwell_eigs_2d(mp, Formulation::Tm2d, &degrees, &refine, 1, &EigenOptions::default())?;
        modes
            .result
            .eigenvalues
            .first()
            .copied()
            .ok_or_else(|| Error::solver("no eigenvalue above the kernel threshold"))
    }
}

/// Energy `1/2 int f u` of `-lap u = 1`, `u = 0` on the boundary.
pub fn poisson_energy(degrees: Vec<usize>, refine: Vec<usize>) -> impl Fn(&MultiPatch) -> Result<f64> + Sync {
    move |mp: &MultiPatch| {
        let space = couple_scalar_multipatch(mp, &degrees, &refine)?;
        let one = [Coefficient::Constant(1.0)];
        let sol = solve_poisson(mp, &space, &one, &one, &BoundaryCondition::homogeneous(mp))?;
        let b = load_multipatch(mp, &space, &one)?;
        Ok(0.5 * b.iter().zip(sol.coefficients()).map(|(x, y)| x * y).sum::<f64>())
    }
}
