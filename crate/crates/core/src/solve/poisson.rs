use super::{solve_spd, FieldSpace, Solution};
use crate::assembly::{apply_dirichlet, assemble_multipatch, load_multipatch, Coefficient, Integrand, ReducedOperand};
use crate::error::{Error, Result};
use crate::geometry::{MultiPatch, Side};
use crate::spaces::MultiPatchSpace;

/// Dirichlet data: the constrained patch sides and the prescribed value.
#[derive(Clone, Debug)]
pub struct BoundaryCondition {
    pub sides: Vec<(usize, Side)>,
    pub value: Coefficient,
}

impl BoundaryCondition {
    /// `u = 0` on every outer side.
    pub fn homogeneous(mp: &MultiPatch) -> Self {
        Self { sides: mp.boundary_sides(), value: Coefficient::Constant(0.0) }
    }
}

/// Solves `-div(nu grad u) = f` on a multipatch with Dirichlet data.
///
/// `nu` and `source` take one coefficient per patch or a single one for all
/// patches. Boundary values are set by evaluating the data at the mapped
/// Greville points of the constrained DOFs.
pub fn solve_poisson(
    mp: &MultiPatch,
    space: &MultiPatchSpace,
    nu: &[Coefficient],
    source: &[Coefficient],
    bc: &BoundaryCondition,
) -> Result<Solution> {
    if bc.sides.is_empty() {
        return Err(Error::solver(
            "pure Neumann problem is singular; fix the gauge by constraining at least one boundary side",
        ));
    }
    let k = assemble_multipatch(mp, space, Integrand::Gradient, nu)?;
    let b = load_multipatch(mp, space, source)?;
    let dofs = space.boundary_dofs(&bc.sides);
    let values = match &bc.value {
        Coefficient::Constant(c) => vec![*c; dofs.len()],
        field => boundary_values(mp, space, &dofs, field)?,
    };
    let (kr, op, recovery) = apply_dirichlet(&k, crate::assembly::Operand::Load(&b), &dofs, &values)?;
    let ReducedOperand::Load(br) = op else { unreachable!("load operand stays a load") };
    let ur = solve_spd(&kr, &br)?;
    let u = recovery.expand(&ur)?;
    Solution::new(mp.clone(), FieldSpace::Scalar(space.clone()), u)
}

fn boundary_values(mp: &MultiPatch, space: &MultiPatchSpace, dofs: &[usize], g: &Coefficient) -> Result<Vec<f64>> {
    let mut anchor: Vec<Option<(usize, usize)>> = vec![None; space.dof_count()];
    for k in (0..mp.patches().len()).rev() {
        for (l, &gl) in space.global_dofs(k).iter().enumerate() {
            anchor[gl] = Some((k, l));
        }
    }
    dofs.iter()
        .map(|&d| {
            let (k, l) = anchor[d].expect("every global DOF has a local owner");
            let s = &space.spaces()[k];
            let (_, idx) = s.locate(l);
            let xi: Vec<f64> = s.base().dirs.iter().enumerate().map(|(j, kv)| kv.greville()[idx[j]]).collect();
            Ok(g.at(&mp.patches()[k].eval_map(&xi)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::conics;
    use crate::spaces::couple_scalar_multipatch;

    fn center_value(sol: &Solution, patch: usize, xi: &[f64]) -> f64 {
        let (s, c) = sol.space().restrict(patch, sol.coefficients()).unwrap();
        s.eval_reference(&c, xi).unwrap()[0]
    }

    #[test]
    fn zero_data_gives_zero() {
        let mp = MultiPatch::single(conics::rectangle([0.0, 1.0], [0.0, 1.0]).unwrap()).unwrap();
        let sp = couple_scalar_multipatch(&mp, &[2], &[4]).unwrap();
        let bc = BoundaryCondition::homogeneous(&mp);
        let sol = solve_poisson(&mp, &sp, &[1.0.into()], &[0.0.into()], &bc).unwrap();
        assert!(sol.coefficients().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_square_center() {
        // Fourier series of -lap u = 1 with u = 0 on the boundary
        let mut oracle = 0.0;
        for m in (1..400).step_by(2) {
            for n in (1..400).step_by(2) {
                let (mf, nf) = (m as f64, n as f64);
                let sign = if ((m + n) / 2 - 1) % 2 == 0 { 1.0 } else { -1.0 };
                oracle += sign * 16.0 / (std::f64::consts::PI.powi(4) * mf * nf * (mf * mf + nf * nf));
            }
        }
        let mp = MultiPatch::single(conics::rectangle([0.0, 1.0], [0.0, 1.0]).unwrap()).unwrap();
        let sp = couple_scalar_multipatch(&mp, &[2], &[16]).unwrap();
        let bc = BoundaryCondition::homogeneous(&mp);
        let sol = solve_poisson(&mp, &sp, &[1.0.into()], &[1.0.into()], &bc).unwrap();
        assert!((oracle - 0.0736713532).abs() < 1e-8, "{oracle}");
        assert!((center_value(&sol, 0, &[0.5, 0.5]) - oracle).abs() < 1e-4);
    }

    #[test]
    fn disc_center_matches_parabola() {
        let mp = conics::disc(1.0).unwrap();
        let sp = couple_scalar_multipatch(&mp, &[3], &[8]).unwrap();
        let bc = BoundaryCondition::homogeneous(&mp);
        let sol = solve_poisson(&mp, &sp, &[1.0.into()], &[1.0.into()], &bc).unwrap();
        // patch 0 is the central square, the origin is its parametric midpoint
        assert!((center_value(&sol, 0, &[0.5, 0.5]) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn linear_boundary_data_is_reproduced() {
        let mp = MultiPatch::single(conics::rectangle([0.0, 2.0], [0.0, 1.0]).unwrap()).unwrap();
        let sp = couple_scalar_multipatch(&mp, &[2], &[3]).unwrap();
        let bc =
            BoundaryCondition { sides: mp.boundary_sides(), value: Coefficient::field(|x| 1.0 + x[0] - 2.0 * x[1]) };
        let sol = solve_poisson(&mp, &sp, &[1.0.into()], &[0.0.into()], &bc).unwrap();
        let x = mp.patches()[0].eval_map(&[0.3, 0.6]).unwrap();
        assert!((center_value(&sol, 0, &[0.3, 0.6]) - (1.0 + x[0] - 2.0 * x[1])).abs() < 1e-12);
    }

    #[test]
    fn neumann_only_asks_for_gauge() {
        let mp = MultiPatch::single(conics::rectangle([0.0, 1.0], [0.0, 1.0]).unwrap()).unwrap();
        let sp = couple_scalar_multipatch(&mp, &[1], &[2]).unwrap();
        let bc = BoundaryCondition { sides: vec![], value: 0.0.into() };
        let err = solve_poisson(&mp, &sp, &[1.0.into()], &[1.0.into()], &bc).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("gauge"));
    }
}
